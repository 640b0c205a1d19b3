#!/usr/bin/env python3
"""Validate captured API responses against the JSON schemas.

Usage: validate_responses.py SCHEMA_DIR RESPONSE_DIR

Every file in RESPONSE_DIR is named <schema>__<case>.json and is checked against
SCHEMA_DIR/<schema>.schema.json. Every schema must have at least one response.
"""
import json
import sys
from pathlib import Path

import jsonschema


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    schema_dir, response_dir = Path(sys.argv[1]), Path(sys.argv[2])
    if not response_dir.is_dir():
        print(f"no captured responses in {response_dir}", file=sys.stderr)
        return 1
    schemas = {p.name.removesuffix(".schema.json"): json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
    seen = {name: 0 for name in schemas}
    failed = 0
    for path in sorted(response_dir.glob("*.json")):
        name = path.name.split("__", 1)[0]
        if name not in schemas:
            print(f"FAIL {path.name}: no schema named {name}")
            failed += 1
            continue
        try:
            jsonschema.validate(json.loads(path.read_text()), schemas[name])
            print(f"ok   {path.name}")
            seen[name] += 1
        except (json.JSONDecodeError, jsonschema.ValidationError) as e:
            print(f"FAIL {path.name}: {getattr(e, 'message', e)}")
            failed += 1
    for name, count in seen.items():
        if count == 0:
            print(f"FAIL {name}: no captured response")
            failed += 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
