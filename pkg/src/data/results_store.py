import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import pandas as pd

from src import __version__
from src.experiments.config import ExperimentConfig, config_hash

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def provenance(config: ExperimentConfig, command: str) -> Dict[str, Any]:
    """Header fields identifying how a table was produced."""
    return {
        "command": command,
        "config_hash": config_hash(config),
        "seed": config.seed,
        "version": __version__,
    }


def _native(value: Any) -> Any:
    return value.item() if hasattr(value, "item") else str(value)


class ResultsStore:
    """Writes and reads result tables with a provenance header."""

    def render(self, frame: pd.DataFrame, fmt: str, header: Dict[str, Any]) -> str:
        """Serialize a table; identical inputs give byte-identical text."""
        if fmt == "csv":
            lines = [f"# {key}: {header[key]}" for key in sorted(header)]
            body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
            return "\n".join(lines) + "\n" + body
        if fmt == "json":
            document = {"provenance": header, "rows": frame.to_dict(orient="records")}
            return json.dumps(document, sort_keys=True, indent=2, default=_native) + "\n"
        raise ValueError(f"Unknown output format {fmt!r}")

    def write(self, frame: pd.DataFrame, path: Optional[str], fmt: str, header: Dict[str, Any]) -> str:
        """Write the table to path (created as needed) and return the text."""
        text = self.render(frame, fmt, header)
        if path:
            output_path = Path(path)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, "w", newline="") as f:
                f.write(text)
            logger.info("Wrote %d rows to %s", len(frame), output_path)
        return text

    def read(self, path: str) -> Tuple[Dict[str, str], pd.DataFrame]:
        """Load a table written by write(); returns (provenance, rows)."""
        input_path = Path(path)
        if not input_path.exists():
            raise FileNotFoundError(f"Results file {input_path} not found")
        if input_path.suffix == ".json":
            with open(input_path, "r") as f:
                document = json.load(f)
            return document["provenance"], pd.DataFrame(document["rows"])

        header: Dict[str, str] = {}
        with open(input_path, "r") as f:
            for line in f:
                if not line.startswith("# "):
                    break
                key, _, value = line[2:].rstrip("\n").partition(": ")
                header[key] = value
        return header, pd.read_csv(input_path, skiprows=len(header))
