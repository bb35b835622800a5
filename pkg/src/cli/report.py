"""Report assembly and emission in the frozen schema."""

import csv
import io
import json
import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional

from config.settings import get_setting
from ..utils.errors import ConfigurationError
from ..utils.logger import get_logger
from .models import OutputFormat, RunConfig

logger = get_logger()

EXECUTION_ONLY = {"threads"}


@lru_cache(maxsize=None)
def load_schema(path: Optional[str] = None) -> Dict[str, Any]:
    schema_path = Path(path or get_setting("report_schema_path"))
    try:
        return json.loads(schema_path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(
            f"Report schema not found: {schema_path}",
            user_message="The report schema file is missing",
            suggestions=["Restore schema/report_schema_v1.json", "Set report_schema_path in config/settings.py"],
            context={"path": str(schema_path)},
        )
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Report schema is not valid JSON: {e}",
                                 user_message="The report schema file is corrupt",
                                 context={"path": str(schema_path)})


def csv_columns(command: str) -> List[str]:
    columns = load_schema()["csv_columns"].get(command)
    if columns is None:
        raise ConfigurationError(f"No CSV columns for {command}",
                                 user_message=f"The report schema has no table for '{command}'")
    return list(columns)


def jsonable(value: Any) -> Any:
    """Non-finite floats become strings so the output stays strict JSON."""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(jsonable(value), sort_keys=True)
    return str(value)


def build_report(config: RunConfig, result: Dict[str, Any], verdicts: Dict[str, Any]) -> Dict[str, Any]:
    """Self-describing report: tool version, resolved config, result and verdicts.

    Execution-only settings are left out of the embedded config so the bytes
    do not depend on them.
    """
    return {
        "tool": get_setting("tool_name", "coarse-bezout"),
        "tool_version": get_setting("tool_version", "1.0.0"),
        "command": config.command.value,
        "config": config.model_dump(mode="json", exclude=EXECUTION_ONLY),
        "result": result,
        "verdicts": verdicts,
    }


def render(config: RunConfig, result: Dict[str, Any], rows: List[Dict[str, Any]],
           verdicts: Dict[str, Any]) -> str:
    if config.format is OutputFormat.JSON:
        return json.dumps(jsonable(build_report(config, result, verdicts)), sort_keys=True, indent=2) + "\n"
    columns = csv_columns(config.command.value)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def emit(text: str, output: Optional[str], stream) -> None:
    """Single writer: the output file when given, else `stream`."""
    if output:
        target = Path(output)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
        logger.info("Report written", path=str(target), bytes=len(text))
    else:
        stream.write(text)
