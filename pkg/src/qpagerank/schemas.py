"""JSON schemas for the files written by the command-line tool."""

RANKING_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["rank", "label", "probability", "hub_class"],
        "properties": {
            "rank": {"type": "integer", "minimum": 1},
            "label": {"type": "string"},
            "probability": {"type": "number", "minimum": 0},
            "hub_class": {"enum": ["main", "secondary", "rest"]},
            "lon": {"type": "number"},
            "lat": {"type": "number"},
        },
        "additionalProperties": False,
    },
}

COUNTS_SCHEMA = {
    "type": "object",
    "required": ["main", "secondary", "rest"],
    "properties": {k: {"type": "integer", "minimum": 0} for k in ("main", "secondary", "rest")},
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["command", "solver_version", "inputs", "params", "options", "counts",
                 "wall_seconds", "peak_bytes", "load_report"],
    "properties": {
        "command": {"enum": ["rank", "classical"]},
        "solver_version": {"type": "string"},
        "inputs": {
            "type": "object",
            "required": ["edges"],
            "properties": {"edges": {"type": "string"}, "nodes": {"type": ["string", "null"]}},
        },
        "params": {
            "type": "object",
            "required": ["omega", "q", "c"],
            "properties": {k: {"type": "number"} for k in ("omega", "q", "c")},
        },
        "config": {"type": ["object", "null"]},
        "options": {"type": "object"},
        "counts": COUNTS_SCHEMA,
        "wall_seconds": {"type": "number", "minimum": 0},
        "peak_bytes": {"type": "integer", "minimum": 0},
        "diagnostics": {"type": ["object", "null"]},
        "load_report": {"type": "object"},
    },
}

BENCH_COLUMNS = ("n", "seconds", "peak_bytes", "slots_per_n2", "steps", "rhs_evaluations",
                 "t_reached", "status", "n4_free", "oracle_error")
