import json
import subprocess
import sys
from pathlib import Path

import pytest

sympy = pytest.importorskip("sympy")

from fixture_gen.generator import (  # noqa: E402
    DEFAULT_FIELDS,
    bundle_filename,
    dumps_bundle,
    generate_bundle,
    generate_fixtures,
)

REPO_ROOT = Path(__file__).resolve().parents[2]
COMMITTED = REPO_ROOT / "fixtures"


@pytest.fixture(scope="module")
def main_bundle():
    return generate_bundle(17, 33)


def test_bundle_reference_values(main_bundle):
    assert main_bundle["field"]["d_K"] == 314721
    assert main_bundle["field"]["k"] == 561
    assert main_bundle["modulus_norm"] == 16
    assert len(main_bundle["crt"]["reduction_maps"]) == 4
    norms = {tuple(c["coeffs"]): c["norm"] for c in main_bundle["norm_checks"]}
    assert norms[(1, 0, 0, 0)] == 1
    assert norms[(-1, 2, 0, 0)] == 17 ** 2       # sqrt(17)
    assert norms[(-1, 0, 2, 0)] == 33 ** 2       # sqrt(33)


def test_reduction_maps_respect_structure_constants(main_bundle):
    # cross-language consistency: the maps are ring homomorphisms w.r.t. the
    # structure constants recorded in the same bundle
    c = main_bundle["field"]["structure_constants"]
    for t in main_bundle["crt"]["reduction_maps"]:
        assert t[0] == 1
        for i in range(4):
            for j in range(4):
                lhs = (t[i] * t[j]) % 2
                rhs = sum(c[i][j][l] * t[l] for l in range(4)) % 2
                assert lhs == rhs


def test_idempotents_solve_the_maps(main_bundle):
    maps = main_bundle["crt"]["reduction_maps"]
    idems = main_bundle["crt"]["idempotents"]
    for j, u in enumerate(idems):
        for i, t in enumerate(maps):
            img = sum(a * b for a, b in zip(t, u)) % 2
            assert img == (1 if i == j else 0)


def test_deterministic_regeneration(tmp_path, main_bundle):
    assert dumps_bundle(main_bundle) == dumps_bundle(generate_bundle(17, 33))
    paths = generate_fixtures(tmp_path, fields=((17, 33),))
    again = generate_fixtures(tmp_path / "again", fields=((17, 33),))
    assert paths[0].read_bytes() == again[0].read_bytes()


@pytest.mark.skipif(not COMMITTED.exists(), reason="no committed fixtures")
def test_regenerated_fixtures_byte_identical(tmp_path):
    generate_fixtures(tmp_path, fields=DEFAULT_FIELDS)
    for a, b in DEFAULT_FIELDS:
        name = bundle_filename(a, b)
        assert (tmp_path / name).read_bytes() == (COMMITTED / name).read_bytes(), name


def run_primary_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "biqlat", *args],
                          capture_output=True, text=True, cwd=REPO_ROOT)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def test_primary_field_info_matches_bundles():
    pytest.importorskip("biqlat")
    for a, b in DEFAULT_FIELDS:
        bundle = json.loads((COMMITTED / bundle_filename(a, b)).read_text())
        report = run_primary_cli("field-info", "--a", str(a), "--b", str(b))
        for key in ("a", "b", "k", "d_K", "signature", "integral_basis",
                    "structure_constants"):
            assert report[key] == bundle["field"][key], (a, b, key)


def test_primary_split_matches_bundles():
    pytest.importorskip("biqlat")
    for a, b in DEFAULT_FIELDS:
        bundle = json.loads((COMMITTED / bundle_filename(a, b)).read_text())
        report = run_primary_cli("split", "--a", str(a), "--b", str(b), "--p", "2")
        assert report["completely_split"] is True
        assert report["modulus_norm"] == bundle["modulus_norm"]
        assert json.dumps(report["crt"], sort_keys=True) == \
            json.dumps(bundle["crt"], sort_keys=True)
