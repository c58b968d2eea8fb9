import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from notescore import _kernels


def _pairs(seed, count=50, max_len=60, vocab=6):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        a = rng.integers(0, vocab, rng.integers(0, max_len))
        b = rng.integers(0, vocab, rng.integers(0, max_len))
        yield a.astype(np.int64), b.astype(np.int64)


@pytest.mark.parametrize("seed", range(4))
def test_tables_and_tracebacks_agree(seed):
    for a, b in _pairs(seed):
        d_nb = _kernels.dp_table_numba(a, b)
        d_np = _kernels.dp_table_numpy(a, b)
        np.testing.assert_array_equal(d_nb, d_np)
        np.testing.assert_array_equal(
            _kernels.traceback_numba(d_nb, a, b),
            _kernels.traceback_python(d_np, a, b),
        )


def test_table_boundaries():
    a = np.array([1, 2, 3], dtype=np.int64)
    b = np.array([], dtype=np.int64)
    for dp in (_kernels.dp_table_numba, _kernels.dp_table_numpy):
        d = dp(a, b)
        assert d.shape == (4, 1)
        assert d[:, 0].tolist() == [0, 1, 2, 3]
        assert dp(b, b).tolist() == [[0]]


def test_long_sequence_cost():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 50, 800)
    b = a.copy()
    b[::10] = 99
    for backend in ("numba", "numpy"):
        cost, ops = _kernels.edit_ops(a, b, backend)
        assert cost == 80
        assert np.bincount(ops, minlength=4).tolist() == [720, 80, 0, 0]


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.get_backend("fortran")


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, NOTESCORE_DISABLE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from notescore import _kernels; print(_kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected


def test_benchmark_smoke():
    path = Path(__file__).parents[1] / "benchmarks" / "bench_align.py"
    r = subprocess.run([sys.executable, str(path), "--sizes", "5", "--repeat", "1", "--pairs", "2",
                        "--notes", "4", "--note-length", "20", "--jobs", "1", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert "speedup" in r.stdout and "jobs=2" in r.stdout
