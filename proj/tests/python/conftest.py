import json
import os
import pathlib
import subprocess

import pytest

SCHEMA_DIR = pathlib.Path(os.environ.get("MIXCENTER_SCHEMA_DIR", pathlib.Path(__file__).parents[2] / "schemas"))


@pytest.fixture(scope="session")
def cli():
    exe = os.environ.get("MIXCENTER_CLI")
    if not exe:
        pytest.skip("MIXCENTER_CLI not set")

    def run(*args, expect=0, cwd=None):
        proc = subprocess.run([exe, *map(str, args)], capture_output=True, text=True, cwd=cwd)
        assert proc.returncode == expect, proc.stderr
        return proc

    return run


@pytest.fixture(scope="session")
def schema():
    def load(name):
        return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())

    return load
