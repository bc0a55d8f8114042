import pathlib
from typing import NamedTuple

import tomli

PYPROJECT = pathlib.Path(__file__).parents[1] / "pyproject.toml"


class ProjectMetadata(NamedTuple):
    name: str
    version: str
    description: str


def get_project_metadata() -> ProjectMetadata:
    """Read the Poetry metadata of the project from pyproject.toml."""
    with open(PYPROJECT, "rb") as f:
        poetry = tomli.load(f)["tool"]["poetry"]
    return ProjectMetadata(
        name=poetry["name"],
        version=poetry["version"],
        description=poetry["description"],
    )


def get_wheel_path() -> pathlib.Path:
    """Get the Path of a wheel that would be generated for the current project
    version.
    """
    metadata = get_project_metadata()
    name = metadata.name.replace(".", "_")
    return pathlib.Path("dist") / f"{name}-{metadata.version}-py3-none-any.whl"
