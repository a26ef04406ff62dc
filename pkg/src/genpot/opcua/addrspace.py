"""Node table served to clients.

Application nodes live in namespace 2::

    Objects
      Fan0    Voltage
      Fan1    Voltage
      Beam    Yaw, Pitch, YawDot, PitchDot
      Target  TargetYaw, TargetPitch

Fan and Beam variables are read-only; Target variables accept writes.
Each variable holds a ``(value, source_ts, server_ts)`` tuple that is
replaced in one assignment, so readers never see a half-updated value.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..timeseries import REPLICATED
from .codec import LocalizedText, NodeId, QualifiedName, now_ticks
from .messages import BrowseDirection, NodeClass

APP_NS = 2
NAMESPACES = ("http://opcfoundation.org/UA/", "urn:genpot:server", "urn:genpot:cps")

# standard nodes
ROOT = NodeId(0, 84)
OBJECTS = NodeId(0, 85)
TYPES = NodeId(0, 86)
OBJECT_TYPES = NodeId(0, 88)
BASE_OBJECT_TYPE = NodeId(0, 58)
FOLDER_TYPE = NodeId(0, 61)
BASE_DATA_VARIABLE_TYPE = NodeId(0, 63)
DOUBLE = NodeId(0, 11)

# reference types
REFERENCES = NodeId(0, 31)
NON_HIERARCHICAL = NodeId(0, 32)
HIERARCHICAL = NodeId(0, 33)
HAS_CHILD = NodeId(0, 34)
ORGANIZES = NodeId(0, 35)
AGGREGATES = NodeId(0, 44)
HAS_SUBTYPE = NodeId(0, 45)
HAS_PROPERTY = NodeId(0, 46)
HAS_COMPONENT = NodeId(0, 47)
HAS_TYPE_DEFINITION = NodeId(0, 40)

_SUPERTYPE = {
    NON_HIERARCHICAL: REFERENCES,
    HIERARCHICAL: REFERENCES,
    HAS_CHILD: HIERARCHICAL,
    ORGANIZES: HIERARCHICAL,
    AGGREGATES: HAS_CHILD,
    HAS_SUBTYPE: HAS_CHILD,
    HAS_PROPERTY: AGGREGATES,
    HAS_COMPONENT: AGGREGATES,
    HAS_TYPE_DEFINITION: NON_HIERARCHICAL,
}


class AttributeId:
    NodeId = 1
    NodeClass = 2
    BrowseName = 3
    DisplayName = 4
    Description = 5
    WriteMask = 6
    UserWriteMask = 7
    IsAbstract = 8
    EventNotifier = 12
    Value = 13
    DataType = 14
    ValueRank = 15
    ArrayDimensions = 16
    AccessLevel = 17
    UserAccessLevel = 18
    MinimumSamplingInterval = 19
    Historizing = 20


ACCESS_READ = 0x01
ACCESS_WRITE = 0x02


def is_subtype(ref: NodeId, base: NodeId) -> bool:
    while ref is not None:
        if ref == base:
            return True
        ref = _SUPERTYPE.get(ref)
    return False


@dataclass(frozen=True)
class Reference:
    ref_type: NodeId
    target: NodeId
    forward: bool


@dataclass(eq=False)
class NodeDef:
    node_id: NodeId
    browse_name: QualifiedName
    node_class: NodeClass
    parent: NodeId | None = None
    type_definition: NodeId | None = None
    data_type: NodeId | None = None
    access_level: int = 0
    declared_access: int = 0
    description: str | None = None
    state: tuple = field(default=(0.0, 0, 0), repr=False)  # (value, source_ts, server_ts)

    @property
    def display_name(self) -> LocalizedText:
        return LocalizedText(self.browse_name.name, None)

    @property
    def readable(self) -> bool:
        return bool(self.access_level & ACCESS_READ)

    @property
    def writable(self) -> bool:
        return bool(self.access_level & ACCESS_WRITE)


# (object, object type, variables) with each variable's replicated name and writability
LAYOUT = (
    ("Fan0", "FanType", (("Voltage", "Voltage0", False),)),
    ("Fan1", "FanType", (("Voltage", "Voltage1", False),)),
    ("Beam", "BeamType", (("Yaw", "Yaw", False), ("Pitch", "Pitch", False), ("YawDot", "YawDot", False), ("PitchDot", "PitchDot", False))),
    ("Target", "TargetType", (("TargetYaw", "TargetYaw", True), ("TargetPitch", "TargetPitch", True))),
)


class AddressSpace:
    """Nodes, references and the variables fed by the publisher."""

    def __init__(self):
        self.nodes: dict[NodeId, NodeDef] = {}
        self.refs: dict[NodeId, list[Reference]] = {}
        self.by_variable: dict[str, NodeDef] = {}

    def add(self, node: NodeDef, ref_type: NodeId | None = None) -> NodeDef:
        if node.node_id in self.nodes:
            raise ValueError(f"duplicate node id {node.node_id}")
        if node.node_class == NodeClass.Variable and (node.parent is None or self.nodes[node.parent].node_class != NodeClass.Object):
            raise ValueError(f"variable {node.node_id} needs a parent object")
        if node.access_level & ~node.declared_access:
            raise ValueError("access level exceeds the declared access")
        self.nodes[node.node_id] = node
        self.refs.setdefault(node.node_id, [])
        if node.parent is not None:
            self.link(node.parent, ref_type or HAS_COMPONENT, node.node_id)
        if node.type_definition is not None:
            self.refs[node.node_id].append(Reference(HAS_TYPE_DEFINITION, node.type_definition, True))
        return node

    def link(self, source: NodeId, ref_type: NodeId, target: NodeId) -> None:
        self.refs[source].append(Reference(ref_type, target, True))
        self.refs.setdefault(target, []).append(Reference(ref_type, source, False))

    def get(self, node_id: NodeId) -> NodeDef | None:
        return self.nodes.get(node_id)

    def browse(self, node_id: NodeId, direction=BrowseDirection.Forward, ref_type: NodeId | None = HIERARCHICAL, include_subtypes: bool = True, node_class_mask: int = 0):
        """References of ``node_id`` matching the filters; ``None`` if the node is unknown."""
        if node_id not in self.nodes:
            return None
        out = []
        for ref in self.refs.get(node_id, ()):
            if direction == BrowseDirection.Forward and not ref.forward:
                continue
            if direction == BrowseDirection.Inverse and ref.forward:
                continue
            if ref_type is not None and not ref_type.is_null():
                if not (ref.ref_type == ref_type or (include_subtypes and is_subtype(ref.ref_type, ref_type))):
                    continue
            target = self.nodes.get(ref.target)
            if node_class_mask and (target is None or not target.node_class & node_class_mask):
                continue
            out.append(ref)
        return out

    def children(self, node_id: NodeId) -> list[NodeDef]:
        return [self.nodes[r.target] for r in self.browse(node_id) or () if r.target in self.nodes]

    def find(self, *path: str) -> NodeDef:
        """Resolve a browse path of names starting below Objects."""
        node = self.nodes[OBJECTS]
        for name in path:
            for child in self.children(node.node_id):
                if child.browse_name.name == name:
                    node = child
                    break
            else:
                raise KeyError("/".join(path))
        return node

    # -- values

    def publish(self, row, source_ts: int | None = None) -> None:
        """Store one row of the eight replicated variables."""
        ts = now_ticks() if source_ts is None else source_ts
        for name, v in zip(REPLICATED, row):
            self.by_variable[name].state = (float(v), ts, ts)

    def set_value(self, node: NodeDef, value: float, source_ts: int | None = None) -> None:
        now = now_ticks()
        node.state = (value, now if source_ts is None else source_ts, now)

    def variable_nodes(self) -> list[NodeDef]:
        return [n for n in self.nodes.values() if n.node_class == NodeClass.Variable]


def build_address_space() -> AddressSpace:
    space = AddressSpace()
    ns0 = lambda i, name, cls, **kw: NodeDef(NodeId(0, i), QualifiedName(0, name), cls, **kw)
    space.add(ns0(84, "Root", NodeClass.Object, type_definition=FOLDER_TYPE))
    space.add(ns0(85, "Objects", NodeClass.Object, parent=ROOT, type_definition=FOLDER_TYPE), ORGANIZES)
    space.add(ns0(86, "Types", NodeClass.Object, parent=ROOT, type_definition=FOLDER_TYPE), ORGANIZES)
    space.add(ns0(88, "ObjectTypes", NodeClass.Object, parent=TYPES, type_definition=FOLDER_TYPE), ORGANIZES)
    space.add(ns0(58, "BaseObjectType", NodeClass.ObjectType, parent=OBJECT_TYPES), ORGANIZES)

    type_ids = {}
    for k, name in enumerate(("FanType", "BeamType", "TargetType")):
        node = space.add(
            NodeDef(NodeId(APP_NS, 1001 + k), QualifiedName(APP_NS, name), NodeClass.ObjectType, parent=BASE_OBJECT_TYPE),
            HAS_SUBTYPE,
        )
        type_ids[name] = node.node_id

    for k, (obj_name, type_name, variables) in enumerate(LAYOUT):
        base = 2000 + 10 * k
        obj = space.add(
            NodeDef(NodeId(APP_NS, base), QualifiedName(APP_NS, obj_name), NodeClass.Object, parent=OBJECTS, type_definition=type_ids[type_name]),
            ORGANIZES,
        )
        for j, (var_name, replicated, writable) in enumerate(variables):
            access = ACCESS_READ | (ACCESS_WRITE if writable else 0)
            node = space.add(
                NodeDef(
                    NodeId(APP_NS, base + 1 + j),
                    QualifiedName(APP_NS, var_name),
                    NodeClass.Variable,
                    parent=obj.node_id,
                    type_definition=BASE_DATA_VARIABLE_TYPE,
                    data_type=DOUBLE,
                    access_level=access,
                    declared_access=access,
                )
            )
            space.by_variable[replicated] = node
    return space
