import math

import numpy as np
import pytest

from ncrr.exceptions import DomainError
from ncrr.imaging import (
    MaskedImageProblem,
    camera_experiment,
    dct2,
    dct_matrix,
    idct2,
    psnr,
    random_mask,
    read_pgm,
    recover,
    test_image as make_test_image,
    write_pgm,
)
from ncrr.regularizers import Regularizer
from ncrr.solver import SolverConfig


def test_constant_image_has_only_dc():
    c = dct2(np.full((8, 16), 0.5))
    assert c[0, 0] == pytest.approx(0.5 * math.sqrt(8 * 16))
    c[0, 0] = 0
    assert np.max(np.abs(c)) < 1e-13


def test_roundtrip_and_parseval():
    a = np.random.default_rng(0).random((12, 10))
    c = dct2(a)
    np.testing.assert_allclose(idct2(c), a, atol=1e-13)
    assert np.sum(c**2) == pytest.approx(np.sum(a**2))


def test_dct_matrix_is_orthonormal():
    C = dct_matrix(7)
    np.testing.assert_allclose(C @ C.T, np.eye(7), atol=1e-13)
    x = np.arange(7.0)
    np.testing.assert_allclose(C @ x, dct2(x[:, None])[:, 0], atol=1e-12)


def test_psnr_examples():
    a = np.zeros((4, 4))
    assert psnr(a, a) == 999.0
    assert psnr(a, a + 0.1) == pytest.approx(20.0)
    assert psnr(a, a + 1.0, peak=255) == pytest.approx(20 * math.log10(255))
    with pytest.raises(DomainError):
        psnr(a, np.zeros((3, 3)))


def test_mask():
    m = random_mask(10, 10, 0.25, seed=1)
    assert m.sum() == 25
    np.testing.assert_array_equal(m, random_mask(10, 10, 0.25, seed=1))
    with pytest.raises(DomainError):
        random_mask(4, 4, 0.0)


def test_design_columns_are_masked_atoms():
    mask = random_mask(8, 8, 0.5, seed=2)
    mp = MaskedImageProblem.from_image(np.zeros((8, 8)), mask)
    X = mp.design()
    assert X.shape == (32, 64)
    assert np.all(np.sum(X**2, axis=0) <= 1 + 1e-12)
    # column (k, l) is the masked inverse DCT of the unit coefficient
    e = np.zeros((8, 8))
    e[2, 5] = 1.0
    np.testing.assert_allclose(X[:, 2 * 8 + 5], idct2(e)[mask], atol=1e-14)


def test_problem_validation():
    with pytest.raises(DomainError):
        MaskedImageProblem(np.zeros((2, 2), dtype=bool), [])
    with pytest.raises(DomainError):
        MaskedImageProblem(np.ones((2, 2), dtype=bool), [1.0])


def test_full_mask_tiny_lambda_recovers_image():
    img = make_test_image(16)
    mp = MaskedImageProblem.from_image(img, np.ones_like(img, dtype=bool))
    rec, tr = recover(mp, Regularizer("L1", 1e-12), SolverConfig(psi=0.0, tau=1e-14, max_sweeps=50))
    assert psnr(rec, img) >= 80


def test_huge_lambda_gives_zero_image():
    img = make_test_image(16)
    mp = MaskedImageProblem.from_image(img, random_mask(16, 16, 0.5))
    rec, _ = recover(mp, Regularizer("LSP", 1e3, 1e-3))
    assert np.all(rec == 0)


def test_test_image_range():
    img = make_test_image(32)
    assert img.shape == (32, 32) and img.min() >= 0 and img.max() <= 1


def test_pgm_roundtrip(tmp_path):
    img = make_test_image(16)
    path = tmp_path / "a.pgm"
    write_pgm(path, img)
    assert path.read_bytes().startswith(b"P5")
    back = read_pgm(path)
    assert np.max(np.abs(back - img)) <= 0.5 / 255 + 1e-12


def test_small_camera_experiment():
    img = make_test_image(16)
    res = camera_experiment(img, fraction=0.5, regs=("LSP", "L1"), lambda_grid=(1e-4, 1e-2))
    assert len(res.rows) == 4
    for name in ("LSP", "L1"):
        lam, val = res.best[name]
        assert val == max(r[2] for r in res.rows if r[0] == name)
        assert res.images[name].shape == img.shape
