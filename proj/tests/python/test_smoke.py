import numpy as np
import pytest

import densnet


def test_irreps_and_hidden_config():
    assert densnet.parse_irreps(" 2x0e + 1x1o ") == "2x0e+1x1o"
    assert densnet.irreps_dim("12x0e+5x1o+4x2e+2x3o+1x4e") == 70
    assert densnet.hidden_config(2, 105) == "315x0e+315x0o+35x1e+35x1o+21x2e+21x2o"
    assert densnet.truncate_spec("12x0e+5x1o+4x2e", 1) == "12x0e+5x1o"
    with pytest.raises(densnet.DensnetError):
        densnet.parse_irreps("3y1o")


def test_harmonics_rotate_with_wigner_d():
    r = densnet.random_rotation(7)
    n = np.array([0.3, -0.4, 0.866])
    n /= np.linalg.norm(n)
    y0 = densnet.real_sph_harm(3, n)
    yr = densnet.real_sph_harm(3, r @ n)
    for l in range(4):
        d = densnet.wigner_d(l, r)
        np.testing.assert_allclose(d @ d.T, np.eye(2 * l + 1), atol=1e-12)
        np.testing.assert_allclose(yr[l], d @ y0[l], atol=1e-12)
    # Y1 follows (y, z, x).
    np.testing.assert_allclose(y0[1] / np.linalg.norm(y0[1]), n[[1, 2, 0]], atol=1e-12)


def test_clebsch_gordan_shape_and_norm():
    c = densnet.clebsch_gordan(1, 2, 2)
    assert c.shape == (3, 5, 5)
    assert np.isclose((c**2).sum(), 5.0)
    assert not densnet.clebsch_gordan(1, 1, 3).any()


def test_model_forward_is_equivariant_and_checkpoints(tmp_path):
    out_h = densnet.synthetic_basis_spec("H")
    out_o = densnet.synthetic_basis_spec("O")
    model = densnet.Model(densnet.hidden_config(1, 3), out_h, out_o, num_layers=2, seed=4)
    assert model.param_count > 0
    species, xyz = densnet.generate_clusters(1, 2, 3)[0]
    out = model.forward(species, xyz)
    assert [len(a) for a in out] == [densnet.irreps_dim(out_o if s == "O" else out_h) for s in species]
    shifted = model.forward(species, xyz + np.array([1.0, -2.0, 0.5]))
    for a, b in zip(out, shifted):
        np.testing.assert_allclose(a, b, atol=1e-10)
    # The first scalar of each atom is rotation invariant.
    r = densnet.random_rotation(11)
    rotated = model.forward(species, xyz @ r.T)
    for a, b in zip(out, rotated):
        assert abs(a[0] - b[0]) < 1e-10

    path = tmp_path / "m.ckpt"
    model.save(str(path))
    again = densnet.Model.load(str(path))
    for a, b in zip(out, again.forward(species, xyz)):
        np.testing.assert_array_equal(a, b)


def test_run_experiment_is_deterministic(tmp_path):
    cfg = "\n".join([
        "n_train = 4", "n_test = 2", "n_molecules = 2", "l_h = 0, 1", "n_s = 2",
        "num_layers = 1", "epochs = 2", "batch_size = 2", "probe_structures = 2",
        "grid_spacing = 0.8", "grid_padding = 2.5", "seed = 3",
    ])
    assert "epochs = 2" in densnet.parse_config(cfg)
    a = densnet.run_experiment(1, cfg, str(tmp_path / "a"))
    b = densnet.run_experiment(1, cfg, str(tmp_path / "b"))
    assert a == b
    assert a.splitlines()[0].startswith("l_h,hidden,param_count")
    assert len(a.splitlines()) == 3
    assert (tmp_path / "a" / "exp1.csv").read_text() == a
    with pytest.raises(densnet.DensnetError):
        densnet.run_experiment(4, cfg, str(tmp_path / "c"))
