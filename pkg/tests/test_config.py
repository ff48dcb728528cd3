import pytest

from sharpcq.config import RunConfig, thread_cap


@pytest.mark.parametrize("field", ["kmax", "bmax", "cores_to_try", "state_cap", "max_promoted"])
def test_nonpositive_limits_rejected(field):
    with pytest.raises(ValueError):
        RunConfig(**{field: 0})


def test_unknown_mode_and_order_rejected():
    with pytest.raises(ValueError):
        RunConfig(mode="fast")
    with pytest.raises(ValueError):
        RunConfig(sbar_order="random")


def test_thread_cap_env(monkeypatch):
    monkeypatch.setenv("SHARPCQ_THREADS", "4")
    assert thread_cap() == 4
    monkeypatch.setenv("SHARPCQ_THREADS", "zero")
    assert thread_cap() == 1
    monkeypatch.delenv("SHARPCQ_THREADS")
    assert thread_cap() == 1
