"""Batch entry point: regenerate the committed fixture bundles."""

from __future__ import annotations

import argparse
import sys


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fixture-gen",
        description="Regenerate golden fixture bundles for the biquadratic lattice suite.",
    )
    parser.add_argument("--out", default="fixtures", help="output directory")
    parser.add_argument("--fields", default=None,
                        help="comma-separated a:b pairs, e.g. '17:33,17:41'")
    args = parser.parse_args(argv)

    try:
        from .generator import DEFAULT_FIELDS, generate_fixtures
    except ImportError as exc:                       # CAS missing
        print(f"error: computer algebra backend unavailable: {exc}", file=sys.stderr)
        return 3

    if args.fields:
        fields = []
        for part in args.fields.split(","):
            a, _, b = part.partition(":")
            fields.append((int(a), int(b)))
    else:
        fields = DEFAULT_FIELDS

    try:
        paths = generate_fixtures(args.out, fields)
    except Exception as exc:                         # no partial files were written
        print(f"error: generation failed: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
