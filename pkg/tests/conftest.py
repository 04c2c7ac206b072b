import json
import shutil

import pytest

from mediaopinion.datasets import BUNDLE_DIR


@pytest.fixture
def bundle(tmp_path):
    """Copy of the bundled synthetic inputs in a scratch directory."""
    dst = tmp_path / "bundle"
    shutil.copytree(BUNDLE_DIR, dst)
    return dst


@pytest.fixture
def write_jsonl(tmp_path):
    def _write(name, records):
        path = tmp_path / name
        with path.open("w") as fh:
            for rec in records:
                fh.write((rec if isinstance(rec, str) else json.dumps(rec)) + "\n")
        return path

    return _write
