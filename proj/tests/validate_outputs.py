"""Validate shipped configs and CLI outputs against the JSON schemas."""
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource


def main() -> int:
    schema_dir, config_dir, out_dir = (pathlib.Path(a) for a in sys.argv[1:4])
    schemas = {p.name: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(s)) for name, s in schemas.items()
    )

    def validator(name):
        return jsonschema.Draft202012Validator(schemas[name], registry=registry)

    by_output = {
        "summary.json": "summary.schema.json",
        "reconstruction.json": "reconstruction.schema.json",
        "certificate.json": "certificate.schema.json",
        "index.json": "index.schema.json",
    }
    checked = 0
    failures = []
    for cfg in sorted(config_dir.glob("*.json")):
        doc = json.loads(cfg.read_text())
        if "matrix" in doc and "operator" not in doc:
            continue
        errs = list(validator("config.schema.json").iter_errors(doc))
        failures += [f"{cfg}: {e.message}" for e in errs]
        checked += 1
    for path in sorted(out_dir.rglob("*.json")):
        schema = by_output.get(path.name)
        if schema is None:
            continue
        errs = list(validator(schema).iter_errors(json.loads(path.read_text())))
        failures += [f"{path}: {e.message}" for e in errs]
        checked += 1
    for f in failures:
        print("INVALID", f)
    print(f"validated {checked} documents, {len(failures)} errors")
    return 1 if failures or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
