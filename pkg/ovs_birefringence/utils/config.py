import configparser
import logging
import os
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

from dotenv import load_dotenv

from ..errors import ConfigError
from ..scene.models import Scene
from ..scene.parser import PLAIN_SECTIONS, preset_document, read_document, scene_from_document
from ..scene.presets import builtin_mode

load_dotenv()

logger = logging.getLogger("OVSConfig")

ENV_PREFIX = "OVS_"
DEFAULT_PRESET = "cu_10_0"


def env_section_name(section: str) -> str:
    """'materials.bgo' -> 'MATERIALS_BGO'"""
    return section.replace(".", "_").upper()


class Config:
    """Run defaults taken from the environment (and a .env file when present)"""

    def __init__(self, environ: Optional[Mapping[str, str]] = None):
        self.environ = dict(os.environ if environ is None else environ)
        self.threads = self._int("OVS_THREADS", 1)
        self.out_dir = self.environ.get("OVS_OUT_DIR", "results")
        self.log_level = self.environ.get("OVS_LOG_LEVEL", "INFO").upper()

    def _int(self, name: str, default: int) -> int:
        raw = self.environ.get(name)
        if raw in (None, ""):
            return default
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring {name}={raw!r}: not an integer")
            return default

    def scene_overrides(self, parser: configparser.ConfigParser) -> Dict[Tuple[str, str], str]:
        """
        Collect OVS_<SECTION>__<KEY> variables for the sections a document can hold

        Args:
            parser: the parsed document; materials and primitive sections only
                match when the document already declares them

        Returns:
            (section, key) -> raw value
        """
        sections = {env_section_name(name): name for name in PLAIN_SECTIONS}
        sections.update({env_section_name(name): name for name in parser.sections()})
        overrides: Dict[Tuple[str, str], str] = {}
        for variable, value in sorted(self.environ.items()):
            if not variable.startswith(ENV_PREFIX) or "__" not in variable:
                continue
            section_part, key = variable[len(ENV_PREFIX):].split("__", 1)
            if section_part not in sections:
                logger.warning(f"Ignoring {variable}: no section matches")
                continue
            overrides[(sections[section_part], key.lower())] = value
        return overrides

    def apply_env_overrides(self, parser: configparser.ConfigParser) -> configparser.ConfigParser:
        for (section, key), value in self.scene_overrides(parser).items():
            if not parser.has_section(section):
                parser.add_section(section)
            parser.set(section, key, value)
            logger.debug(f"Environment override {section}.{key} = {value}")
        return parser

    def load_scene(
        self,
        config_path: Optional[str] = None,
        mode: Optional[str] = None,
        resolution: Optional[float] = None,
    ) -> Scene:
        """
        Resolve the scene for a CLI run

        Args:
            config_path: scene document; the built-in preset for mode is used when absent
            mode: built-in mode name or slug replacing the document's electrode
            resolution: mesh resolution in m replacing [sim] mesh_resolution

        Returns:
            Validated Scene
        """
        if config_path is None:
            text = preset_document(mode or DEFAULT_PRESET)
        else:
            path = Path(config_path)
            if not path.is_file():
                raise ConfigError(f"config not found: {config_path}")
            text = path.read_text(encoding="utf-8")

        parser = self.apply_env_overrides(read_document(text))
        overrides = {("sim", "mesh_resolution"): repr(float(resolution))} if resolution is not None else None
        scene = scene_from_document(parser, overrides)
        if mode is not None:
            electrode = builtin_mode(mode)
            scene = scene.with_mode(electrode)
            if config_path is None:
                scene = scene.model_copy(update={"name": electrode.slug})
        return scene


config = Config()
