import os
import subprocess
from pathlib import Path

from jinja2 import Environment, FileSystemLoader

from scripts.get_wheel_path import get_project_metadata

ROOT_PATH = Path(__file__).parents[1]
EXAMPLE_PLAN = ROOT_PATH / "test" / "functional" / "test_cli" / "plan_small.json"
README_TEMPLATE = Path(__file__).parent / "README_template.md"
README = ROOT_PATH / "README.md"

JINJA_ENV = Environment(
    loader=FileSystemLoader(README_TEMPLATE.parent), keep_trailing_newline=True
)

AUTOGENERATION_NOTE = (
    "[//]: # (This README.md is autogenerated from README_template.md with the script\n"
    "         render_readme.py)"
)

# Commands whose output is shown in README.md, in order of appearance.
README_COMMANDS = {
    "info": ["info", "zn:27"],
    "charpoly": ["charpoly", "zn:27", "9"],
    "census": ["matrix", "zn:27", "9", "--census"],
    "verify": ["verify", "zn:9"],
}


def get_readme_example_command(args: list[str]) -> str:
    """Run ringspectra with args and format the command & its output as a code
    block.
    """
    process = subprocess.run(
        ["ringspectra", *args],
        encoding="utf-8",
        stdout=subprocess.PIPE,
        check=True,
        cwd=ROOT_PATH,
        env={**os.environ, "PYTHONIOENCODING": "utf-8"},
    )
    return f"```\n$ ringspectra {' '.join(args)}\n{process.stdout}```"


def get_readme_example_plan() -> str:
    return f"```json\n{EXAMPLE_PLAN.read_text().strip()}\n```"


def get_readme_contents() -> str:
    template = JINJA_ENV.get_template(README_TEMPLATE.name)
    metadata = get_project_metadata()
    examples = {
        f"example_{name}": get_readme_example_command(args)
        for name, args in README_COMMANDS.items()
    }
    readme_contents = template.render(
        autogeneration_note=AUTOGENERATION_NOTE,
        description=metadata.description,
        example_plan=get_readme_example_plan(),
        **examples,
    )
    return readme_contents


def assert_readme_updated():
    """Raise an AssertionError if the contents of the README file don't equal
    the text returned by get_readme_contents.
    """
    readme_contents = get_readme_contents()
    if README.read_text(encoding="utf-8") != readme_contents:
        raise AssertionError("README.md is not updated.")


def render_readme():
    """Write the text returned by get_readme_contents to the README file."""
    readme_contents = get_readme_contents()
    with open(README, "w", encoding="utf-8") as readme_file:
        readme_file.write(readme_contents)


def main():
    render_readme()


if __name__ == "__main__":
    main()
