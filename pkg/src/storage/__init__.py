from .files import atomic_write_text, canonical_json, config_hash, read_json, sidecar_path, write_json
from .tables import (
    read_cancoh_field,
    read_panel,
    read_table,
    write_cancoh_field,
    write_lws_csv,
    write_panel,
    write_table,
)

__all__ = [
    "atomic_write_text",
    "canonical_json",
    "config_hash",
    "read_cancoh_field",
    "read_json",
    "read_panel",
    "read_table",
    "sidecar_path",
    "write_cancoh_field",
    "write_json",
    "write_lws_csv",
    "write_panel",
    "write_table",
]
