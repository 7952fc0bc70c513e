import os

import pytest

from confh.cache import SCHEMA, CacheCorrupt, ResultCache
from confh.ce import betti_table
from confh.cli import run
from confh.lie import build_lie_algebra
from confh.manifold import sphere, surface


@pytest.fixture
def cache(tmp_path):
    return ResultCache(tmp_path / "c")


def test_miss_then_hit(cache):
    g = build_lie_algebra(sphere(2))
    assert cache.load(g, 3) is None
    cache.store(g, 3, {0: 1, 3: 1})
    assert cache.load(g, 3) == {0: 1, 3: 1}
    text = cache.path(g, 3).read_text()
    assert text.splitlines()[0] == SCHEMA and text.endswith("end\n")


def test_no_temporary_files_left(cache):
    g = build_lie_algebra(sphere(2))
    for n in range(4):
        cache.store(g, n, {0: 1})
    assert not [p for p in os.listdir(cache.directory) if p.startswith(".tmp-")]


def test_warm_cache_gives_same_table(cache):
    m = surface(1)
    cold = betti_table(m, 6, cache=cache)
    assert len(list(cache.directory.iterdir())) == 7
    assert betti_table(m, 6, cache=cache) == cold == betti_table(m, 6)


def test_hash_distinguishes_algebras(cache):
    a, b = build_lie_algebra(surface(1)), build_lie_algebra(surface(2))
    assert cache.path(a, 2) != cache.path(b, 2)


@pytest.mark.parametrize("mutate", [
    lambda t: t[: len(t) // 2],
    lambda t: t.replace(SCHEMA, "confh-cache v0"),
    lambda t: t.replace("weight 3", "weight 4"),
    lambda t: t.replace("3 1", "3 x"),
    lambda t: t.replace("end\n", ""),
    lambda t: t.replace("algebra ", "algebra 0"),
    lambda t: t.replace("0 1\n", "0 1\n0 2\n"),
])
def test_corruption_detected(cache, mutate):
    g = build_lie_algebra(sphere(2))
    cache.store(g, 3, {0: 1, 3: 1})
    p = cache.path(g, 3)
    p.write_text(mutate(p.read_text()))
    with pytest.raises(CacheCorrupt):
        cache.load(g, 3)


def test_cli_exit_three_on_corruption(tmp_path, capsys):
    d = tmp_path / "cc"
    code, _ = run(["betti", "--manifold", "sphere:2", "--n-max", "3", "--cache", str(d)])
    assert code == 0
    victim = sorted(d.iterdir())[0]
    victim.write_text("garbage\n")
    code, out = run(["betti", "--manifold", "sphere:2", "--n-max", "3", "--cache", str(d)])
    assert code == 3 and out == ""
    assert "cache corrupt" in capsys.readouterr().err


def test_cli_env_cache_dir(tmp_path, monkeypatch):
    d = tmp_path / "env"
    monkeypatch.setenv("CONFH_CACHE", str(d))
    code, _ = run(["betti", "--manifold", "sphere:2", "--n-max", "2"])
    assert code == 0 and len(list(d.iterdir())) == 3
