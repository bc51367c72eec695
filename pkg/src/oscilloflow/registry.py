"""
Registry for named components.

Initial-data generators register themselves here under
a (kind, name) pair so that configs and the CLI can refer to them by name.
"""

from typing import Any, Callable, Dict, List


REGISTRY: Dict[str, Dict[str, Any]] = {}


def register(kind: str, name: str) -> Callable[[Any], Any]:
    def deco(obj):
        table = REGISTRY.setdefault(kind, {})
        if name in table:
            raise ValueError(f"Component already registered: {kind}/{name}")
        table[name] = obj
        return obj
    return deco


def get_component(kind: str, name: str) -> Any:
    table = REGISTRY.get(kind, {})
    if name not in table:
        raise KeyError(f"Component not found: {kind}/{name}")
    return table[name]


def list_components(kind: str) -> List[str]:
    return sorted(REGISTRY.get(kind, {}))
