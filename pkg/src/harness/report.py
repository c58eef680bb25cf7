from pathlib import Path

from jinja2 import Environment, FileSystemLoader

TEMPLATES_DIR = Path(__file__).parent / "templates"

_env = Environment(loader=FileSystemLoader(str(TEMPLATES_DIR)), keep_trailing_newline=True)


def render_report(payload):
    """Markdown report from the run summary payload (see write_summary)."""
    return _env.get_template("report.md.j2").render(**payload)


def write_report(path, payload):
    text = render_report(payload)
    with open(path, 'w') as f:
        f.write(text)
    return text
