"""
Tests for the project manifest: installable layout, console script and pinned requirements.
"""

import sys
from pathlib import Path

import pytest
from packaging.requirements import Requirement
from packaging.utils import canonicalize_name

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

BACKEND = Path(__file__).resolve().parent.parent
ROOT = BACKEND.parent


def _manifest():
    with open(ROOT / "pyproject.toml", "rb") as handle:
        return tomllib.load(handle)


def _declared():
    project = _manifest()["project"]
    declared = {}
    for line in project["dependencies"] + [dep for deps in project["optional-dependencies"].values() for dep in deps]:
        req = Requirement(line)
        declared[canonicalize_name(req.name)] = req
    return declared


def _pins():
    pins = []
    for line in (BACKEND / "requirements.txt").read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            pins.append(Requirement(line))
    return pins


class TestManifest:
    """Test suite for the setuptools layout and entry point."""

    def setup_method(self):
        """Set up test fixtures."""
        self.manifest = _manifest()
        self.setuptools = self.manifest["tool"]["setuptools"]

    def test_build_backend(self):
        assert self.manifest["build-system"]["build-backend"] == "setuptools.build_meta"

    def test_top_level_modules_live_in_package_dir(self):
        source = ROOT / self.setuptools["package-dir"][""]
        assert source == BACKEND
        for module in self.setuptools["py-modules"]:
            assert (source / f"{module}.py").is_file()
        find = self.setuptools["packages"]["find"]
        assert ROOT / find["where"][0] == BACKEND
        assert (BACKEND / "app" / "__init__.py").is_file()
        assert "app*" in find["include"]

    def test_console_script_target(self):
        module, _, attr = self.manifest["project"]["scripts"]["dbp-sim"].partition(":")
        assert module in self.setuptools["py-modules"]
        entry = __import__(module)
        assert callable(getattr(entry, attr))


class TestRequirementPins:
    """Test suite for requirements.txt against the declared ranges."""

    @pytest.mark.parametrize("pin", _pins(), ids=lambda req: req.name)
    def test_pin_satisfies_declared_range(self, pin):
        declared = _declared()
        name = canonicalize_name(pin.name)
        assert name in declared
        (spec,) = list(pin.specifier)
        assert spec.operator == "=="
        assert declared[name].specifier.contains(spec.version)

    def test_every_runtime_dependency_is_pinned(self):
        pinned = {canonicalize_name(pin.name) for pin in _pins()}
        for line in _manifest()["project"]["dependencies"]:
            assert canonicalize_name(Requirement(line).name) in pinned
