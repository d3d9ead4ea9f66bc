"""
Sectioned key-value scene documents.

    [materials.bgo]
    density = 7130.0

    [primitive.crystal]
    shape = box
    material = bgo
    origin = -0.005, -0.005, 0.025
    extents = 0.01, 0.01, 0.01

Sections: scene, materials.<tag>, optics, primitive.<name>, path, electrode,
sim, signal. Primitives are listed in document order; a later primitive wins
where two overlap.
"""

import configparser
import hashlib
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Type

from pydantic import BaseModel, ValidationError

from .models import (
    BoxPrimitive,
    CylinderPrimitive,
    ElectrodeMode,
    GeometrySpec,
    MaterialProps,
    OpticalProps,
    PathSpec,
    Scene,
    SignalParams,
    SimParams,
)
from .presets import DEFAULT_MATERIALS, builtin_mode, default_scene
from ..errors import ConfigError, ConfigSyntaxError

PLAIN_SECTIONS = ("scene", "optics", "path", "electrode", "sim", "signal")
MATERIAL_PREFIX = "materials."
PRIMITIVE_PREFIX = "primitive."

_OPTICS_NOTES = (
    "# base_index: BGO ordinary index near 976 nm (materials handbook value)",
    "# r41: BGO linear electro-optic coefficient, m/V (materials handbook value)",
    "# rel_permittivity: BGO static relative permittivity (materials handbook value)",
    "# q11 - q12 and q44: photoelastic differences, m^2/N; only differences matter",
)

Overrides = Mapping[Tuple[str, str], str]


def read_document(text: str) -> configparser.ConfigParser:
    """Parse raw text into sections without interpreting any value"""
    parser = configparser.ConfigParser(
        interpolation=None,
        inline_comment_prefixes=("#", ";"),
        default_section="__ovs_defaults__",
    )
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigSyntaxError("key outside of any [section]", line=exc.lineno) from exc
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ConfigSyntaxError(exc.message.splitlines()[0], line=exc.lineno) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigSyntaxError("malformed line", line=line) from exc
    return parser


def _build(model: Type[BaseModel], data: Mapping[str, Any], section: str) -> Any:
    try:
        return model.model_validate(dict(data))
    except ValidationError as exc:
        error = exc.errors()[0]
        location = ".".join([section] + [str(part) for part in error["loc"]])
        if error["type"] == "missing":
            message = "missing required key"
        elif error["type"] == "extra_forbidden":
            message = "unknown key"
        else:
            message = error["msg"].replace("Value error, ", "")
        raise ConfigError(message, field=location) from exc


def _section(parser: configparser.ConfigParser, name: str) -> Dict[str, str]:
    return dict(parser[name]) if parser.has_section(name) else {}


def scene_from_document(parser: configparser.ConfigParser, overrides: Optional[Overrides] = None) -> Scene:
    for (section, key), value in (overrides or {}).items():
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value)

    sections = parser.sections()
    primitive_sections = [s for s in sections if s.startswith(PRIMITIVE_PREFIX)]
    if not primitive_sections:
        raise ConfigError("missing geometry")
    for section in sections:
        if section not in PLAIN_SECTIONS and not section.startswith((MATERIAL_PREFIX, PRIMITIVE_PREFIX)):
            raise ConfigError("unknown section", field=section)

    material_sections = [s for s in sections if s.startswith(MATERIAL_PREFIX)]
    if material_sections:
        materials = {}
        for section in material_sections:
            tag = section[len(MATERIAL_PREFIX):]
            base = DEFAULT_MATERIALS[tag].model_dump() if tag in DEFAULT_MATERIALS else {}
            materials[tag] = _build(MaterialProps, {**base, **parser[section]}, section)
    else:
        materials = dict(DEFAULT_MATERIALS)

    optics = _build(OpticalProps, _section(parser, "optics"), "optics")

    primitives = []
    for section in primitive_sections:
        data = {"name": section[len(PRIMITIVE_PREFIX):], **parser[section]}
        shape = data.get("shape")
        if shape == "box":
            primitives.append(_build(BoxPrimitive, data, section))
        elif shape == "cylinder":
            primitives.append(_build(CylinderPrimitive, data, section))
        else:
            raise ConfigError("shape must be box or cylinder", field=f"{section}.shape")

    scene_keys = _section(parser, "scene")
    crystal_material = scene_keys.get("crystal_material", "bgo")
    path_keys = _section(parser, "path")
    wavelength = path_keys.pop("wavelength", None)
    if not {"entry", "direction", "length"} & set(path_keys):
        path_keys = _default_path(primitives, crystal_material)
    path = _build(PathSpec, path_keys, "path")
    geometry_data: Dict[str, Any] = {"primitives": tuple(primitives), "path": path}
    if wavelength is not None:
        geometry_data["optical_wavelength"] = wavelength
    geometry = _build(GeometrySpec, geometry_data, "path")

    electrode_keys = _section(parser, "electrode")
    preset = electrode_keys.pop("preset", None)
    if preset is not None or not electrode_keys:
        base = builtin_mode(preset or "Cu 10:0").model_dump()
        electrode_keys = {**base, **electrode_keys}
    electrode = _build(ElectrodeMode, electrode_keys, "electrode")

    sim = _build(SimParams, _section(parser, "sim"), "sim")
    signal = _build(SignalParams, _section(parser, "signal"), "signal")

    return _build(Scene, {
        **scene_keys,
        "materials": materials,
        "optics": optics,
        "geometry": geometry,
        "electrode": electrode,
        "sim": sim,
        "signal": signal,
    }, "scene")


def _default_path(primitives: Iterable[Any], crystal_material: str) -> Dict[str, Any]:
    """Centre line of the crystal box along +x"""
    boxes = [p for p in primitives if isinstance(p, BoxPrimitive) and p.material == crystal_material]
    if not boxes:
        raise ConfigError("missing required key", field="path.entry")
    low, high = boxes[-1].bounds
    centre = (low + high) / 2.0
    return {
        "entry": (float(low[0]), float(centre[1]), float(centre[2])),
        "direction": (1.0, 0.0, 0.0),
        "length": float(high[0] - low[0]),
    }


def parse_config(text: str, overrides: Optional[Overrides] = None) -> Scene:
    """Build a validated Scene from document text; overrides are (section, key) -> raw value"""
    return scene_from_document(read_document(text), overrides)


def _fmt(value: Any) -> str:
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_scene(scene: Scene) -> str:
    """Canonical document text; parse_config(serialize_scene(s)) == s"""
    lines: List[str] = ["# ovs-birefringence scene", ""]

    def section(name: str, values: Mapping[str, Any], notes: Iterable[str] = ()) -> None:
        lines.append(f"[{name}]")
        lines.extend(notes)
        for key, value in values.items():
            if value is not None:
                lines.append(f"{key} = {_fmt(value)}")
        lines.append("")

    section("scene", {
        "name": scene.name,
        "crystal_material": scene.crystal_material,
        "heater_material": scene.heater_material,
    })
    for tag, props in scene.materials.items():
        section(MATERIAL_PREFIX + tag, props.model_dump())
    section("optics", scene.optics.model_dump(), _OPTICS_NOTES)
    for primitive in scene.geometry.primitives:
        values = primitive.model_dump()
        name = values.pop("name")
        section(PRIMITIVE_PREFIX + name, values)
    section("path", {**scene.geometry.path.model_dump(), "wavelength": scene.geometry.optical_wavelength})
    section("electrode", scene.electrode.model_dump())
    section("sim", _sim_values(scene.sim))
    section("signal", scene.signal.model_dump())
    return "\n".join(lines)


def _sim_values(sim: SimParams) -> Dict[str, Any]:
    """Sim keys; a reference_t equal to ambient_t is left out so it follows ambient overrides"""
    values = sim.model_dump()
    if values["reference_t"] == values["ambient_t"]:
        del values["reference_t"]
    return values


def config_hash(scene: Scene) -> str:
    """SHA-256 of the canonical document with normalized line endings"""
    text = serialize_scene(scene).replace("\r\n", "\n")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def preset_document(name: str) -> str:
    return serialize_scene(default_scene(name))
