import os
import time

from utils.cache import CacheManager


def test_stage_key_is_canonical():
    a = CacheManager.stage_key({"elements": ["0", "1"], "leq": []}, "homogenized", 2)
    b = CacheManager.stage_key({"leq": [], "elements": ["0", "1"]}, "homogenized", 2)
    assert a == b
    assert a.endswith("|homogenized|2")
    assert a != CacheManager.stage_key({"elements": ["0", "1"], "leq": []}, "pudlak", 2)


def test_set_get_delete(tmp_path):
    cache = CacheManager(str(tmp_path / "c"), ttl_hours=1)
    assert cache.get("missing") is None
    assert cache.set("k", {"nodes": [0, 1]})
    assert cache.get("k") == {"nodes": [0, 1]}
    assert cache.delete("k")
    assert not cache.delete("k")
    assert cache.get("k") is None


def test_unserializable_value_is_not_written(tmp_path):
    cache = CacheManager(str(tmp_path), ttl_hours=1)
    assert not cache.set("k", {"bad": object()})


def test_expired_entries_are_dropped(tmp_path):
    cache = CacheManager(str(tmp_path), ttl_hours=1)
    cache.set("old", [1, 2, 3])
    (path,) = tmp_path.glob("*.json")
    past = time.time() - 2 * 3600
    os.utime(path, (past, past))
    assert cache.get("old") is None
    assert not path.exists()


def test_unreadable_entry(tmp_path):
    cache = CacheManager(str(tmp_path), ttl_hours=1)
    cache.set("k", 1)
    (path,) = tmp_path.glob("*.json")
    path.write_text("{not json")
    assert cache.get("k") is None


def test_clear_all(tmp_path):
    cache = CacheManager(str(tmp_path), ttl_hours=1)
    for key in ("a", "b", "c"):
        cache.set(key, key)
    assert cache.clear_all() == 3
    assert not list(tmp_path.glob("*.json"))
