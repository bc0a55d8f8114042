from .get_wheel_path import ProjectMetadata, get_project_metadata, get_wheel_path
from .render_readme import assert_readme_updated, render_readme
