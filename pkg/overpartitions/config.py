"""
Configuration for the overpartition congruence tools
Settings come from OPC_* environment variables, optionally loaded from a .env file
"""

import os
from pathlib import Path
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

DEFAULT_CACHE_DIR = "./opc_cache"
DEFAULT_INDEX_CAP = 10 ** 8
DEFAULT_LMAX = 5000
DEFAULT_MEMORY_CAP_MB = 2048
DEFAULT_WORKERS = 4
DEFAULT_CERT_DB = "opc_certificates.db"

# CliConfig field -> environment variable
ENV_VARS = {
    'cache_dir': 'OPC_CACHE_DIR',
    'index_cap': 'OPC_INDEX_CAP',
    'output_format': 'OPC_OUTPUT_FORMAT',
    'lmax': 'OPC_LMAX',
    'memory_cap_mb': 'OPC_MEMORY_CAP_MB',
    'workers': 'OPC_WORKERS',
    'hm_config': 'OPC_HM_CONFIG',
    'enable_m23': 'OPC_ENABLE_M23',
    'cert_db': 'OPC_CERT_DB',
}


class CliConfig(BaseModel):
    cache_dir: Path = Path(DEFAULT_CACHE_DIR)
    index_cap: int = Field(default=DEFAULT_INDEX_CAP, ge=10 ** 4)
    output_format: Literal['json', 'csv', 'text'] = 'text'
    lmax: int = Field(default=DEFAULT_LMAX, ge=3)
    memory_cap_mb: int = Field(default=DEFAULT_MEMORY_CAP_MB, ge=1)
    workers: int = Field(default=DEFAULT_WORKERS, ge=1)
    hm_config: Optional[Path] = None
    enable_m23: bool = False
    cert_db: Path = Path(DEFAULT_CERT_DB)

    @field_validator('cache_dir')
    @classmethod
    def cache_dir_writable(cls, value: Path) -> Path:
        try:
            value.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ValueError(f"cannot create cache directory {value}: {e}")
        if not os.access(value, os.W_OK):
            raise ValueError(f"cache directory {value} is not writable")
        return value

    @field_validator('hm_config')
    @classmethod
    def hm_config_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.is_file():
            raise ValueError(f"h_m config file {value} not found")
        return value


def load_config(**overrides) -> CliConfig:
    """Environment (and .env) values, with non-None overrides taking precedence"""
    load_dotenv()
    values = {}
    for field, env_var in ENV_VARS.items():
        raw = os.getenv(env_var)
        if raw not in (None, ''):
            values[field] = raw
    values.update({key: value for key, value in overrides.items() if value is not None})
    return CliConfig(**values)
