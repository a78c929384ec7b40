import json
import os
import subprocess

import numpy as np
import pytest

import hubbard_vqe as hv


def test_version_string():
    assert hv.__version__.count(".") == 2


def test_sector_energies_match_known_crossing():
    below = hv.sector_energies(0.3)
    above = hv.sector_energies(0.8)
    assert below["B1"] < below["A1"]
    assert above["A1"] < above["B1"]


def test_transition_bracket():
    base = hv.HubbardParams(n_sites=4, t=1.0, t_prime=0.0, u=0.5)
    x = hv.find_transition(base, hv.Irrep.B1, hv.Irrep.A1, 0.3, 0.7)
    assert 0.48 < x < 0.52


def test_tapered_hamiltonian_is_hermitian_and_small():
    prob = hv.SectorProblem.build(hv.HubbardParams(4, 1.0, 0.3, 0.5), hv.Irrep.B1)
    h = prob.hamiltonian
    assert h.n_qubits == 4
    dense = h.to_dense()
    assert np.allclose(dense, dense.conj().T)
    # The tapered half-filling minimum is the sector energy.
    n = prob.number.to_dense()
    w, v = np.linalg.eigh(dense)
    fillings = np.real(np.einsum("ij,jk,ki->i", v.conj().T, n, v))
    assert min(w[np.isclose(fillings, 4.0)]) == pytest.approx(prob.e0_sector, abs=1e-10)


def test_text_roundtrip():
    prob = hv.SectorProblem.build(hv.HubbardParams(4, 1.0, 0.5, 0.5), hv.Irrep.A1)
    again = hv.PauliSum.from_text(prob.hamiltonian.to_text())
    assert np.allclose(again.to_dense(), prob.hamiltonian.to_dense())


def test_mitigation_helpers():
    assert hv.lanczos_energy(-0.8, 1.0, -0.8) == pytest.approx(-1.0, abs=1e-12)
    value, sigma = hv.weighted_average([(1.0, 1.0), (3.0, 2.0)])
    assert value == pytest.approx(1.4)
    assert sigma == pytest.approx((1.25) ** -0.5)


def test_config_errors_name_the_field():
    with pytest.raises(hv.ConfigError, match="vqe.n_cz"):
        hv.config_from_json(json.dumps({"schema_version": 1, "vqe": {"n_cz": "three"}}))


def test_run_cell_exact_backend():
    cfg = {
        "schema_version": 1,
        "t_prime_grid": [0.3],
        "sectors": ["B1"],
        "vqe": {"n_cz": 3, "n_c": 2, "n_init": 1, "shots": 0, "optimizer": "simplex"},
        "noise": "none",
    }
    records = hv.run_cell(cfg, 0, "B1")
    assert len(records) == 2
    for r in records:
        assert r["E_non"] >= r["E0_sector"] - 1e-9
        assert sum(r["c4_exact"]) == pytest.approx(1.0)
    assert sum(r["selected"] for r in records) == 1


@pytest.mark.skipif("HUBBARD_VQE_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_ed_and_exit_codes(tmp_path):
    cli = os.environ["HUBBARD_VQE_CLI"]
    out = subprocess.run([cli, "ed", "--tprime", "0.3", "--u", "0.5"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "irrep=B1" in out.stdout
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1, "sectors": ["Q7"]}')
    out = subprocess.run([cli, "run", str(bad)], capture_output=True, text=True)
    assert out.returncode == 2
    assert "sectors[0]" in out.stderr
