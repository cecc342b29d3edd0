"""API database: records, loading/validation, dependency graph, homepage choice.

The on-disk format is JSON Lines, one API per line::

    {"id": "gson", "name": "gson", "modules": [{"name": "gson-extras",
     "description": "...", "homepage": null}], "resource_links": [...],
     "portal_description": "...", "homepage_description": "...",
     "license_org": "...", "dependencies": [], "usage_count": 0,
     "download_count": 0, "type_index": ["com.google.gson.Gson"]}

Blank lines are ignored. See ``docs/schema.md`` for the field reference.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping
from urllib.parse import urlsplit

from apimention.errors import ParseError, UnknownIdError, UnreachableResourceError, ValidationError

FIELDS = (
    "id",
    "name",
    "modules",
    "resource_links",
    "portal_description",
    "homepage_description",
    "license_org",
    "dependencies",
    "usage_count",
    "download_count",
    "type_index",
)
REQUIRED = ("id", "name")
MODULE_FIELDS = ("name", "description", "homepage")


@dataclass(frozen=True)
class ModuleEntry:
    name: str
    description: str = ""
    homepage: str | None = None


@dataclass(frozen=True)
class ApiEntry:
    id: str
    name: str
    modules: tuple[ModuleEntry, ...] = ()
    resource_links: tuple[str, ...] = ()
    portal_description: str = ""
    homepage_description: str = ""
    license_org: str = ""
    dependencies: tuple[str, ...] = ()
    usage_count: int = 0
    download_count: int = 0
    type_index: tuple[str, ...] = ()

    def module(self, name: str) -> ModuleEntry | None:
        for m in self.modules:
            if m.name == name:
                return m
        return None

    def to_record(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "modules": [
                {"name": m.name, "description": m.description, "homepage": m.homepage}
                for m in self.modules
            ],
            "resource_links": list(self.resource_links),
            "portal_description": self.portal_description,
            "homepage_description": self.homepage_description,
            "license_org": self.license_org,
            "dependencies": list(self.dependencies),
            "usage_count": self.usage_count,
            "download_count": self.download_count,
            "type_index": list(self.type_index),
        }


class DependencyGraph:
    """Directed dependency edges between API ids; ``a -> b`` means a depends on b."""

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str]]):
        self.nodes = frozenset(nodes)
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        inc: dict[str, set[str]] = {n: set() for n in self.nodes}
        for a, b in edges:
            if a not in self.nodes or b not in self.nodes:
                raise UnknownIdError(f"edge {a!r} -> {b!r} references an unknown id")
            if a == b:
                raise ValidationError(f"self-dependency on {a!r}")
            out[a].add(b)
            inc[b].add(a)
        self._out = {k: frozenset(v) for k, v in out.items()}
        self._in = {k: frozenset(v) for k, v in inc.items()}

    def _check(self, *ids: str) -> None:
        for i in ids:
            if i not in self.nodes:
                raise UnknownIdError(f"unknown API id {i!r}")

    def depends_on(self, a: str, b: str) -> bool:
        self._check(a, b)
        return b in self._out[a]

    def dependents_of(self, a: str) -> frozenset[str]:
        """APIs with a direct edge into ``a``."""
        self._check(a)
        return self._in[a]

    def dependees_of(self, a: str) -> frozenset[str]:
        """APIs that ``a`` directly depends on."""
        self._check(a)
        return self._out[a]

    @property
    def edges(self) -> list[tuple[str, str]]:
        return sorted((a, b) for a, bs in self._out.items() for b in bs)

    def __len__(self) -> int:
        return sum(len(v) for v in self._out.values())


class ApiDatabase(Mapping[str, ApiEntry]):
    """Immutable, validated collection of :class:`ApiEntry` keyed by id."""

    def __init__(self, entries: Iterable[ApiEntry]):
        by_id: dict[str, ApiEntry] = {}
        for e in entries:
            if e.id in by_id:
                raise ValidationError(f"duplicate API id {e.id!r}")
            by_id[e.id] = e
        for e in by_id.values():
            _validate_entry(e)
            for dep in e.dependencies:
                if dep not in by_id:
                    raise ValidationError(f"{e.id!r} depends on unknown id {dep!r}")
        self._entries = by_id
        self.graph = DependencyGraph(
            by_id, ((e.id, d) for e in by_id.values() for d in e.dependencies)
        )
        # Derived, per-load caches (name index, candidate descriptions) live here.
        self.cache: dict[str, Any] = {}

    def __getitem__(self, api_id: str) -> ApiEntry:
        try:
            return self._entries[api_id]
        except KeyError:
            raise UnknownIdError(f"unknown API id {api_id!r}") from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ApiDatabase):
            return NotImplemented
        return self._entries == other._entries

    __hash__ = None  # type: ignore[assignment]

    def owner_of(self, module: ModuleEntry) -> ApiEntry | None:
        for e in self._entries.values():
            if module in e.modules:
                return e
        return None

    def link_owners(self) -> dict[str, str]:
        """Map every normalized resource link to the id of the API that lists it."""
        key = "link_owners"
        if key not in self.cache:
            owners: dict[str, str] = {}
            for e in self._entries.values():
                links = list(e.resource_links) + [m.homepage for m in e.modules if m.homepage]
                for link in links:
                    owners.setdefault(normalize_url(link), e.id)
            self.cache[key] = owners
        return self.cache[key]


def _validate_entry(e: ApiEntry) -> None:
    if not e.id or not e.name:
        raise ValidationError("id and name must be non-empty")
    if e.usage_count < 0 or e.download_count < 0:
        raise ValidationError(f"{e.id!r}: counts must be non-negative")
    seen = set()
    for m in e.modules:
        if not m.name:
            raise ValidationError(f"{e.id!r}: module with empty name")
        if m.name in seen:
            raise ValidationError(f"{e.id!r}: duplicate module {m.name!r}")
        seen.add(m.name)
    for t in e.type_index:
        if "." not in t:
            raise ValidationError(f"{e.id!r}: type_index entry {t!r} is not fully qualified")
    if e.id in e.dependencies:
        raise ValidationError(f"{e.id!r} depends on itself")


def _str(rec: dict, key: str, line: int, source: str | None) -> str:
    val = rec.get(key, "")
    if val is None:
        return ""
    if not isinstance(val, str):
        raise ParseError(f"field {key!r} must be a string", line, source)
    return val


def _str_list(rec: dict, key: str, line: int, source: str | None) -> tuple[str, ...]:
    val = rec.get(key, [])
    if not isinstance(val, list) or not all(isinstance(v, str) for v in val):
        raise ParseError(f"field {key!r} must be a list of strings", line, source)
    return tuple(val)


def _count(rec: dict, key: str, line: int, source: str | None) -> int:
    val = rec.get(key, 0)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ParseError(f"field {key!r} must be an integer", line, source)
    return val


def entry_from_record(rec: Any, line: int = 0, source: str | None = None) -> ApiEntry:
    if not isinstance(rec, dict):
        raise ParseError("record must be a JSON object", line, source)
    unknown = set(rec) - set(FIELDS)
    if unknown:
        raise ParseError(f"unknown field(s) {sorted(unknown)}", line, source)
    for key in REQUIRED:
        if not isinstance(rec.get(key), str) or not rec[key]:
            raise ParseError(f"missing or empty field {key!r}", line, source)
    modules = []
    raw_modules = rec.get("modules", [])
    if not isinstance(raw_modules, list):
        raise ParseError("field 'modules' must be a list", line, source)
    for m in raw_modules:
        if isinstance(m, str):
            m = {"name": m}
        if not isinstance(m, dict) or set(m) - set(MODULE_FIELDS):
            raise ParseError("malformed module record", line, source)
        homepage = m.get("homepage")
        if homepage is not None and not isinstance(homepage, str):
            raise ParseError("module homepage must be a string or null", line, source)
        modules.append(
            ModuleEntry(
                name=_str(m, "name", line, source),
                description=_str(m, "description", line, source),
                homepage=homepage or None,
            )
        )
    return ApiEntry(
        id=rec["id"],
        name=rec["name"],
        modules=tuple(modules),
        resource_links=_str_list(rec, "resource_links", line, source),
        portal_description=_str(rec, "portal_description", line, source),
        homepage_description=_str(rec, "homepage_description", line, source),
        license_org=_str(rec, "license_org", line, source),
        dependencies=_str_list(rec, "dependencies", line, source),
        usage_count=_count(rec, "usage_count", line, source),
        download_count=_count(rec, "download_count", line, source),
        type_index=_str_list(rec, "type_index", line, source),
    )


def parse_database(text: str, source: str | None = None) -> ApiDatabase:
    entries = []
    # not splitlines(): U+2028 and friends may sit unescaped inside JSON strings
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed record: {exc.msg}", lineno, source) from None
        entries.append(entry_from_record(rec, lineno, source))
    return ApiDatabase(entries)


def load_database(path: str | Path) -> ApiDatabase:
    """Load and validate a database file. Dependencies may point forward in the file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read database: {exc.strerror}", source=str(path)) from None
    return parse_database(text, source=str(path))


def serialize_database(db: ApiDatabase) -> str:
    return "".join(
        json.dumps(db[i].to_record(), ensure_ascii=False, sort_keys=False) + "\n" for i in db
    )


def dump_database(db: ApiDatabase, path: str | Path) -> None:
    Path(path).write_text(serialize_database(db), encoding="utf-8")


def normalize_url(url: str) -> str:
    """Lowercased host + path without scheme, ``www.`` or trailing slash."""
    parts = _split(url)
    host = parts.netloc.lower()
    if host.startswith("www."):
        host = host[4:]
    return host + parts.path.rstrip("/")


def _split(url: str):
    if "://" not in url:
        url = "//" + url
    return urlsplit(url)


def url_host(url: str) -> str:
    host = _split(url).netloc.lower()
    return host[4:] if host.startswith("www.") else host


def most_frequent_url(links: Iterable[str]) -> str | None:
    """Pick the smallest URL of the host that owns the most links."""
    by_host: dict[str, list[str]] = defaultdict(list)
    for link in links:
        by_host[url_host(link)].append(link)
    if not by_host:
        return None
    top = max(len(v) for v in by_host.values())
    return min(link for v in by_host.values() if len(v) == top for link in v)


def get_homepage(target: ApiEntry | ModuleEntry, owner: ApiEntry | None = None) -> str:
    """Resolve the resource URL for an API or module.

    A module without its own homepage falls back to ``owner``'s links.
    """
    if isinstance(target, ModuleEntry):
        if target.homepage:
            return target.homepage
        if owner is None:
            raise UnreachableResourceError(f"module {target.name!r} has no homepage")
        target = owner
    url = most_frequent_url(target.resource_links)
    if url is None:
        raise UnreachableResourceError(f"API {target.id!r} has no resource links")
    return url
