import json
import pathlib
import subprocess

import pytest


def pytest_addoption(parser):
    parser.addoption("--compasskit", required=True)
    parser.addoption("--scenarios", required=True)
    parser.addoption("--schemas", required=True)


class Cli:
    def __init__(self, exe, scenarios):
        self.exe = exe
        self.scenarios = pathlib.Path(scenarios)

    def scenario(self, name):
        return str(self.scenarios / f"{name}.scenario")

    def run(self, *args, env=None, check=None):
        p = subprocess.run([self.exe, *map(str, args)], capture_output=True, text=True, env=env)
        if check is not None:
            assert p.returncode == check, p.stdout + p.stderr
        return p


@pytest.fixture(scope="session")
def cli(pytestconfig):
    return Cli(pytestconfig.getoption("compasskit"), pytestconfig.getoption("scenarios"))


@pytest.fixture(scope="session")
def schemas(pytestconfig):
    root = pathlib.Path(pytestconfig.getoption("schemas"))
    return {p.name.removesuffix(".schema.json"): json.loads(p.read_text()) for p in root.glob("*.schema.json")}


@pytest.fixture(scope="session")
def ladder_compare(cli, tmp_path_factory):
    out = tmp_path_factory.mktemp("compare")
    cli.run("-q", "--scenario", cli.scenario("rag_ladder"), "--out", out, "compare", check=0)
    return out
