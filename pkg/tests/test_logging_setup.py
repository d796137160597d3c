"""
Tests for infrastructure/logging/setup.py.
"""

import json
import logging
import sys

import pytest

from infrastructure.logging.setup import (
    _HumanFormatter,
    _JsonFormatter,
    configure_logging,
    get_run_id,
    set_run_id,
)


def _record(msg="hello %s", args=("world",), **extra):
    record = logging.LogRecord("isogap.test", logging.WARNING, __file__, 10, msg, args, None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


@pytest.fixture
def restore_root():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield root
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def fresh_run_id():
    previous = get_run_id()
    yield
    set_run_id(previous or "")


class TestRunId:
    def test_generated(self, fresh_run_id):
        rid = set_run_id()
        assert len(rid) == 32
        assert get_run_id() == rid

    def test_explicit(self, fresh_run_id):
        assert set_run_id("job-7") == "job-7"
        assert get_run_id() == "job-7"


class TestJsonFormatter:
    def test_fields(self, fresh_run_id):
        set_run_id("abc")
        payload = json.loads(_JsonFormatter().format(_record(command="profile")))
        assert payload["level"] == "WARNING"
        assert payload["logger"] == "isogap.test"
        assert payload["msg"] == "hello world"
        assert payload["run_id"] == "abc"
        assert payload["command"] == "profile"
        assert payload["ts"].endswith("Z")
        assert "/" in payload["thread"]

    def test_private_extras_are_dropped(self, fresh_run_id):
        set_run_id("abc")
        payload = json.loads(_JsonFormatter().format(_record(_internal=1)))
        assert "_internal" not in payload

    def test_exception(self):
        try:
            raise RuntimeError("boom")
        except RuntimeError:
            record = _record()
            record.exc_info = sys.exc_info()
        payload = json.loads(_JsonFormatter().format(record))
        assert "RuntimeError: boom" in payload["exc_info"]


class TestHumanFormatter:
    def test_line(self):
        line = _HumanFormatter().format(_record())
        assert "WARNING" in line
        assert "[isogap.test] hello world" in line


class TestConfigureLogging:
    def test_json_to_file(self, restore_root, tmp_path):
        log_file = tmp_path / "logs" / "isogap.log"
        configure_logging("debug", json_output=True, log_file=log_file)
        assert restore_root.level == logging.DEBUG
        logging.getLogger("isogap.test").info("written %d", 3)
        for handler in restore_root.handlers:
            handler.flush()
        lines = [json.loads(s) for s in log_file.read_text().splitlines()]
        assert any(entry["msg"] == "written 3" for entry in lines)

    def test_unknown_level_falls_back_to_info(self, restore_root):
        configure_logging("chatty", json_output=False)
        assert restore_root.level == logging.INFO
        assert isinstance(restore_root.handlers[0].formatter, _HumanFormatter)
