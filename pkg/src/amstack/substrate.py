"""Heterogeneous platform model: devices and profiled operator variants.

Profiles are keyed by (operator, variant, device class), not device id:
two CPUs of the same class share profiles. Latency distributions are
normal(mean, std) truncated below at 0.1 x mean. Communication between
two nodes mapped to different devices costs message_size / min(link
bandwidth of the two); same-device communication is free.

File format (strict; unknown fields rejected):

    {"devices":  [{"id","name","class","cores","link_bw_bps","idle_w"}],
     "profiles": [{"op","variant","class","lat_ms_mean","lat_ms_std","energy_mj"}]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .dsl import DEVICE_CLASSES, Diagnostic
from .errors import StackError
from .graph import ComputationGraph


@dataclass(frozen=True)
class Device:
    id: str
    name: str
    device_class: str
    core_count: int  # parallel lanes, each runs one operator instance at a time
    link_bandwidth_bps: float
    idle_power_w: float


@dataclass(frozen=True)
class VariantProfile:
    operator: str
    variant: str
    device_class: str
    latency_mean_ms: float
    latency_std_ms: float
    energy_per_invocation_mj: float


@dataclass(frozen=True)
class SubstrateModel:
    devices: tuple[Device, ...]
    profiles: tuple[VariantProfile, ...]

    def device(self, device_id: str) -> Device:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(device_id)

    def devices_of_class(self, device_class: str) -> list[Device]:
        return [d for d in self.devices if d.device_class == device_class]

    def classes_for(self, operator: str) -> list[str]:
        seen = []
        for p in self.profiles:
            if p.operator == operator and p.device_class not in seen:
                seen.append(p.device_class)
        return sorted(seen)

    def profile(self, operator: str, variant: str, device_class: str) -> VariantProfile:
        for p in self.profiles:
            if (p.operator, p.variant, p.device_class) == (operator, variant, device_class):
                return p
        raise KeyError((operator, variant, device_class))

    def mean_link_bandwidth(self) -> float:
        return sum(d.link_bandwidth_bps for d in self.devices) / len(self.devices)

    def comm_cost_ms(self, from_device: str, to_device: str, message_bytes: int | None) -> float:
        """Transfer cost between two placements; zero on the same device."""
        if from_device == to_device or not message_bytes:
            return 0.0
        bw = min(self.device(from_device).link_bandwidth_bps, self.device(to_device).link_bandwidth_bps)
        return message_bytes / bw * 1000.0


def query(model: SubstrateModel, operator: str, device_class: str) -> list[VariantProfile]:
    """All variants of `operator` runnable on `device_class`, fastest first.

    Ties on latency break on variant name, so the order is total. An empty
    list means the operator is unsupported on that class.
    """
    hits = [p for p in model.profiles if p.operator == operator and p.device_class == device_class]
    hits.sort(key=lambda p: (p.latency_mean_ms, p.variant))
    return hits


def validate_coverage(model: SubstrateModel, graph: ComputationGraph) -> list[Diagnostic]:
    """Check every operator node can run somewhere the annotations allow."""
    diags = []
    for n in graph.operator_nodes():
        classes = model.classes_for(n.name)
        if not classes:
            diags.append(Diagnostic("error", "E-NOPROFILE", f"operator '{n.name}' has no profile on any device class"))
            continue
        if n.mapping_constraint is not None:
            cls, strength = n.mapping_constraint
            if strength == "requirement" and cls not in classes:
                diags.append(
                    Diagnostic(
                        "error",
                        "E-MAPCONFLICT",
                        f"'{n.name}' is required on {cls} but has no {cls} profile (available: {', '.join(classes)})",
                    )
                )
    return diags


# ---------------------------------------------------------------------------
# Load / save

_DEVICE_FIELDS = {"id", "name", "class", "cores", "link_bw_bps", "idle_w"}
_PROFILE_FIELDS = {"op", "variant", "class", "lat_ms_mean", "lat_ms_std", "energy_mj"}


def _schema_err(message: str, path: str):
    raise StackError("E-SCHEMA", message, path)


def _check_fields(row: dict, allowed: set[str], path: str):
    if not isinstance(row, dict):
        _schema_err("expected an object", path)
    unknown = set(row) - allowed
    if unknown:
        _schema_err(f"unknown field(s): {', '.join(sorted(unknown))}", path)
    missing = allowed - set(row)
    if missing:
        _schema_err(f"missing field(s): {', '.join(sorted(missing))}", path)


def model_from_dict(doc: dict) -> SubstrateModel:
    if not isinstance(doc, dict) or set(doc) != {"devices", "profiles"}:
        _schema_err("top level must have exactly 'devices' and 'profiles'", "/")
    if not isinstance(doc["devices"], list) or not doc["devices"]:
        _schema_err("devices must be a non-empty array", "/devices")
    if not isinstance(doc["profiles"], list):
        _schema_err("profiles must be an array", "/profiles")

    devices = []
    seen_ids = set()
    for i, row in enumerate(doc["devices"]):
        path = f"/devices/{i}"
        _check_fields(row, _DEVICE_FIELDS, path)
        if row["class"] not in DEVICE_CLASSES:
            _schema_err(f"unknown device class '{row['class']}'", path + "/class")
        if not isinstance(row["cores"], int) or row["cores"] < 1:
            _schema_err("cores must be a positive integer", path + "/cores")
        if not isinstance(row["link_bw_bps"], (int, float)) or row["link_bw_bps"] <= 0:
            _schema_err("link_bw_bps must be positive", path + "/link_bw_bps")
        if not isinstance(row["idle_w"], (int, float)) or row["idle_w"] < 0:
            _schema_err("idle_w must be >= 0", path + "/idle_w")
        if row["id"] in seen_ids:
            raise StackError("E-DUPKEY", f"duplicate device id '{row['id']}'", path + "/id")
        seen_ids.add(row["id"])
        devices.append(
            Device(row["id"], row["name"], row["class"], row["cores"], float(row["link_bw_bps"]), float(row["idle_w"]))
        )

    profiles = []
    seen_keys = set()
    for i, row in enumerate(doc["profiles"]):
        path = f"/profiles/{i}"
        _check_fields(row, _PROFILE_FIELDS, path)
        if row["class"] not in DEVICE_CLASSES:
            _schema_err(f"unknown device class '{row['class']}'", path + "/class")
        if not isinstance(row["lat_ms_mean"], (int, float)) or row["lat_ms_mean"] <= 0:
            _schema_err("lat_ms_mean must be positive", path + "/lat_ms_mean")
        if not isinstance(row["lat_ms_std"], (int, float)) or row["lat_ms_std"] < 0:
            _schema_err("lat_ms_std must be >= 0", path + "/lat_ms_std")
        if not isinstance(row["energy_mj"], (int, float)) or row["energy_mj"] < 0:
            _schema_err("energy_mj must be >= 0", path + "/energy_mj")
        key = (row["op"], row["variant"], row["class"])
        if key in seen_keys:
            raise StackError("E-DUPKEY", f"duplicate profile {key}", path)
        seen_keys.add(key)
        profiles.append(
            VariantProfile(
                row["op"], row["variant"], row["class"], float(row["lat_ms_mean"]), float(row["lat_ms_std"]), float(row["energy_mj"])
            )
        )
    return SubstrateModel(tuple(devices), tuple(profiles))


def model_to_dict(model: SubstrateModel) -> dict:
    return {
        "devices": [
            {
                "id": d.id,
                "name": d.name,
                "class": d.device_class,
                "cores": d.core_count,
                "link_bw_bps": d.link_bandwidth_bps,
                "idle_w": d.idle_power_w,
            }
            for d in model.devices
        ],
        "profiles": [
            {
                "op": p.operator,
                "variant": p.variant,
                "class": p.device_class,
                "lat_ms_mean": p.latency_mean_ms,
                "lat_ms_std": p.latency_std_ms,
                "energy_mj": p.energy_per_invocation_mj,
            }
            for p in model.profiles
        ],
    }


def load_profiles(path: str) -> SubstrateModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise StackError("E-IO", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StackError("E-SCHEMA", f"{path} is not valid JSON: {exc}") from exc
    return model_from_dict(doc)


def save_profiles(model: SubstrateModel, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")
