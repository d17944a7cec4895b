import json
import subprocess
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
SCHEMA_DIR = REPO_ROOT / "docs" / "schemas"


def run_cli(command: str, config: dict, out_dir: Path, svg: bool = False, env=None):
    """Invoke the CLI in a subprocess; returns the CompletedProcess."""
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg_path = out_dir / f"_{command}_config.json"
    cfg_path.write_text(json.dumps(config), encoding="utf-8")
    argv = [sys.executable, "-m", "dimerlab", command,
            "--config", str(cfg_path), "--out-dir", str(out_dir)]
    if svg:
        argv.append("--svg")
    return subprocess.run(argv, capture_output=True, text=True, env=env)


def load_schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text(encoding="utf-8"))
