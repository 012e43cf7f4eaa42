import json

import pytest
from fastapi import HTTPException

from src.conf.config import settings
from src.repository.runs import create_run, get_run, list_runs


def test_create_and_get(session):
    record = create_run(session, command="repro f2", report={"b": 1, "a": [1.5]}, config={"n": 4}, seed=3)
    assert record.id is not None
    assert record.artifact_version == settings.artifact_version
    assert record.created_at is not None
    fetched = get_run(session, record.id)
    assert json.loads(fetched.report) == {"a": [1.5], "b": 1}
    assert json.loads(fetched.config) == {"n": 4}
    assert fetched.seed == 3


def test_list_newest_first_and_filtered(session):
    first = create_run(session, command="young eval", report={})
    second = create_run(session, command="repro besov", report={})
    third = create_run(session, command="young eval", report={})
    assert [run.id for run in list_runs(session)] == [third.id, second.id, first.id]
    assert [run.id for run in list_runs(session, command="young eval")] == [third.id, first.id]
    assert [run.id for run in list_runs(session, skip=1, limit=1)] == [second.id]


def test_missing_run(session):
    with pytest.raises(HTTPException) as info:
        get_run(session, 12345)
    assert info.value.status_code == 404
