"""Intra-repo dependency extraction, ordering, and concatenation.

Dependencies are invocation relationships recovered by regular
expressions only (import in Python, using in C#, include in C, ...);
references that do not resolve to a file inside the same repository are
dropped. Files are then ordered so that, wherever the graph allows, a
file's dependencies precede it, and concatenated into one sample per
repository with a path comment heading each file.
"""

from __future__ import annotations

import posixpath
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import SourceFile

# Languages with reference extraction wired up; everything else
# contributes no edges and falls back to input order.
EXTRACTION_LANGUAGES = frozenset(
    {"Python", "C", "C++", "C#", "Java", "TypeScript", "JavaScript", "Go"}
)

_PY_IMPORT = re.compile(r"^\s*import\s+([\w.]+(?:\s*,\s*[\w.]+)*)", re.MULTILINE)
_PY_FROM = re.compile(r"^\s*from\s+([\w.]+)\s+import\s+([\w.*]+(?:\s*,\s*[\w.*]+)*)", re.MULTILINE)
_C_INCLUDE = re.compile(r'^\s*#\s*include\s*[<"]([^>"]+)[>"]', re.MULTILINE)
_CSHARP_USING = re.compile(r"^\s*using\s+(?:static\s+)?([\w.]+)\s*;", re.MULTILINE)
_JAVA_IMPORT = re.compile(r"^\s*import\s+(?:static\s+)?([\w.]+(?:\.\*)?)\s*;", re.MULTILINE)
_JS_FROM = re.compile(r"""(?:import|export)\s+[^;'"]*?from\s+['"]([^'"]+)['"]""")
_JS_BARE = re.compile(r"""(?:import|require)\s*\(\s*['"]([^'"]+)['"]\s*\)""")
_JS_SIDE_EFFECT = re.compile(r"""^\s*import\s+['"]([^'"]+)['"]""", re.MULTILINE)
_GO_SINGLE = re.compile(r'^\s*import\s+(?:\w+\s+)?"([^"]+)"', re.MULTILINE)
_GO_BLOCK = re.compile(r"^\s*import\s*\(([^)]*)\)", re.MULTILINE | re.DOTALL)
_GO_IN_BLOCK = re.compile(r'"([^"]+)"')


def _python_refs(content: str) -> list[str]:
    refs: list[str] = []
    for match in _PY_IMPORT.finditer(content):
        for name in match.group(1).split(","):
            refs.append(name.strip())
    for match in _PY_FROM.finditer(content):
        module = match.group(1)
        refs.append(module)
        for name in match.group(2).split(","):
            name = name.strip()
            if name and name != "*":
                refs.append(f"{module}.{name}")
    return refs


def _js_refs(content: str) -> list[str]:
    refs = [m.group(1) for m in _JS_FROM.finditer(content)]
    refs += [m.group(1) for m in _JS_BARE.finditer(content)]
    refs += [m.group(1) for m in _JS_SIDE_EFFECT.finditer(content)]
    return refs


def _go_refs(content: str) -> list[str]:
    refs = [m.group(1) for m in _GO_SINGLE.finditer(content)]
    for block in _GO_BLOCK.finditer(content):
        refs += _GO_IN_BLOCK.findall(block.group(1))
    return refs


def _module_candidates(module: str, extensions: Sequence[str]) -> list[str]:
    base = module.replace(".", "/")
    cands = [f"{base}{ext}" for ext in extensions]
    if ".py" in extensions:
        cands.append(f"{base}/__init__.py")
    return cands


def _match_suffix(candidate: str, repo_paths: Sequence[str]) -> list[str]:
    tail = "/" + candidate
    return [p for p in repo_paths if p == candidate or p.endswith(tail)]


def _resolve_modules(modules: Iterable[str], extensions: Sequence[str], repo_paths: Sequence[str]) -> list[str]:
    out: list[str] = []
    for module in modules:
        for cand in _module_candidates(module, extensions):
            out.extend(_match_suffix(cand, repo_paths))
    return out


def _resolve_includes(refs: Iterable[str], repo_paths: Sequence[str]) -> list[str]:
    out: list[str] = []
    for ref in refs:
        ref = ref.strip()
        if not ref:
            continue
        hits = _match_suffix(ref, repo_paths)
        if not hits:
            base = posixpath.basename(ref)
            hits = [p for p in repo_paths if posixpath.basename(p) == base]
        out.extend(hits)
    return out


_JS_EXTS = (".ts", ".tsx", ".js", ".jsx", ".mjs", ".cjs")


def _resolve_js(refs: Iterable[str], from_path: str, repo_paths: Sequence[str]) -> list[str]:
    here = posixpath.dirname(from_path)
    out: list[str] = []
    for ref in refs:
        if ref.startswith("."):
            target = posixpath.normpath(posixpath.join(here, ref))
        else:
            target = ref
        cands = [target] if posixpath.splitext(target)[1] else [
            *(target + ext for ext in _JS_EXTS),
            *(posixpath.join(target, "index" + ext) for ext in _JS_EXTS),
        ]
        for cand in cands:
            out.extend(_match_suffix(cand, repo_paths))
    return out


def _resolve_go(refs: Iterable[str], repo_paths: Sequence[str]) -> list[str]:
    # Go import paths carry an unknown module prefix, so match the
    # package directory by suffix in either direction.
    out: list[str] = []
    for ref in refs:
        ref = ref.strip("/")
        if not ref:
            continue
        for p in repo_paths:
            if not p.endswith(".go"):
                continue
            parent = posixpath.dirname(p)
            if not parent:
                continue
            if (
                parent == ref
                or parent.endswith("/" + ref)
                or ref.endswith("/" + parent)
            ):
                out.append(p)
    return out


def extract_dependencies(file: SourceFile, repo_paths: Iterable[str]) -> list[str]:
    """Paths inside the repo that `file` references, first-seen order,
    duplicates and self-references removed. Unsupported languages
    yield no edges.
    """
    paths = sorted(repo_paths)
    lang = file.language
    if lang == "Python":
        hits = _resolve_modules(_python_refs(file.content), (".py",), paths)
    elif lang in ("C", "C++"):
        hits = _resolve_includes(
            (m.group(1) for m in _C_INCLUDE.finditer(file.content)), paths
        )
    elif lang == "C#":
        hits = _resolve_modules(
            (m.group(1) for m in _CSHARP_USING.finditer(file.content)), (".cs",), paths
        )
    elif lang == "Java":
        modules = [m.group(1).removesuffix(".*") for m in _JAVA_IMPORT.finditer(file.content)]
        hits = _resolve_modules(modules, (".java",), paths)
    elif lang in ("TypeScript", "JavaScript"):
        hits = _resolve_js(_js_refs(file.content), file.path, paths)
    elif lang == "Go":
        hits = _resolve_go(_go_refs(file.content), paths)
    else:
        return []
    seen: set[str] = set()
    deps: list[str] = []
    for p in hits:
        if p != file.path and p not in seen:
            seen.add(p)
            deps.append(p)
    return deps


@dataclass(frozen=True)
class DependencyGraph:
    """Adjacency and in-degrees over one repo's files.

    nodes preserves input order (it drives tie-breaking later);
    adjacency[b] lists the files that depend on b; in_degree[a] counts
    the files a depends on, i.e. edges ending at a.
    """

    nodes: tuple[str, ...]
    adjacency: dict[str, list[str]]
    in_degree: dict[str, int]


def build_graph(paths: Sequence[str], edges: Iterable[tuple[str, str]]) -> DependencyGraph:
    """Build the graph from (dependent, dependency) pairs: for each pair
    (a, b) meaning "a depends on b", add edge b -> a and bump a's
    in-degree, once per distinct pair.
    """
    node_set = set(paths)
    if len(node_set) != len(paths):
        raise ValueError("duplicate paths in graph input")
    adjacency: dict[str, list[str]] = {p: [] for p in paths}
    in_degree: dict[str, int] = {p: 0 for p in paths}
    seen_pairs: set[tuple[str, str]] = set()
    for a, b in edges:
        if a not in node_set or b not in node_set:
            raise ValueError(f"edge endpoint not among files: {(a, b)!r}")
        if (a, b) in seen_pairs:
            continue
        seen_pairs.add((a, b))
        adjacency[b].append(a)
        in_degree[a] += 1
    return DependencyGraph(nodes=tuple(paths), adjacency=adjacency, in_degree=in_degree)


def _connected_components(graph: DependencyGraph) -> list[list[str]]:
    """Undirected components, ordered by smallest input index; members
    keep input order.
    """
    index = {p: i for i, p in enumerate(graph.nodes)}
    neighbors: dict[str, set[str]] = {p: set() for p in graph.nodes}
    for b, dependents in graph.adjacency.items():
        for a in dependents:
            neighbors[b].add(a)
            neighbors[a].add(b)
    assigned: dict[str, int] = {}
    components: list[list[str]] = []
    for start in graph.nodes:
        if start in assigned:
            continue
        comp_id = len(components)
        stack = [start]
        members: list[str] = []
        assigned[start] = comp_id
        while stack:
            node = stack.pop()
            members.append(node)
            for nxt in sorted(neighbors[node], key=index.__getitem__):
                if nxt not in assigned:
                    assigned[nxt] = comp_id
                    stack.append(nxt)
        members.sort(key=index.__getitem__)
        components.append(members)
    return components


def topological_sort(graph: DependencyGraph) -> list[list[str]]:
    """Order each disconnected subgraph by repeatedly taking the
    unselected node of minimal current in-degree (ties broken by input
    order) and decrementing the in-degrees of its dependents.

    Selecting by minimum rather than zero makes cycles harmless: the
    procedure always performs exactly one selection per node.
    """
    index = {p: i for i, p in enumerate(graph.nodes)}
    in_degree = dict(graph.in_degree)
    results: list[list[str]] = []
    for component in _connected_components(graph):
        selected: set[str] = set()
        order: list[str] = []
        for _ in range(len(component)):
            node = min(
                (p for p in component if p not in selected),
                key=lambda p: (in_degree[p], index[p]),
            )
            # Decrement dependents unconditionally, selected ones included;
            # already-selected nodes are never re-chosen so this is benign.
            for dependent in graph.adjacency[node]:
                in_degree[dependent] -= 1
            selected.add(node)
            order.append(node)
        results.append(order)
    return results


@dataclass(frozen=True)
class RepoSample:
    """One repository's surviving files, ordered and concatenated."""

    repo_id: str
    ordered_paths: tuple[str, ...]
    text: str
    char_count: int


# Comment syntax used for the path header line, per language.
# Value is (prefix, suffix); suffix is empty for line comments.
_COMMENT_TOKENS: dict[str, tuple[str, str]] = {
    "Python": ("#", ""),
    "Shell": ("#", ""),
    "Ruby": ("#", ""),
    "Perl": ("#", ""),
    "R": ("#", ""),
    "RMarkdown": ("#", ""),
    "YAML": ("#", ""),
    "Makefile": ("#", ""),
    "Dockerfile": ("#", ""),
    "CMake": ("#", ""),
    "Elixir": ("#", ""),
    "Julia": ("#", ""),
    "AWK": ("#", ""),
    "TCL": ("#", ""),
    "Tcsh": ("#", ""),
    "PowerShell": ("#", ""),
    "CoffeeScript": ("#", ""),
    "Literate CoffeeScript": ("#", ""),
    "Stan": ("#", ""),
    "Maple": ("#", ""),
    "Crystal": ("#", ""),
    "Haskell": ("--", ""),
    "Literate Haskell": ("--", ""),
    "Lua": ("--", ""),
    "SQL": ("--", ""),
    "Ada": ("--", ""),
    "Elm": ("--", ""),
    "Agda": ("--", ""),
    "Literate Agda": ("--", ""),
    "Idris": ("--", ""),
    "VHDL": ("--", ""),
    "AppleScript": ("--", ""),
    "Clojure": (";", ""),
    "Common Lisp": (";", ""),
    "Emacs Lisp": (";", ""),
    "Scheme": (";", ""),
    "Racket": (";", ""),
    "Assembly": (";", ""),
    "Erlang": ("%", ""),
    "Prolog": ("%", ""),
    "Tex": ("%", ""),
    "MATLAB": ("%", ""),
    "Visual Basic": ("'", ""),
    "Batchfile": ("REM", ""),
    "Fortran": ("!", ""),
    "HTML": ("<!--", " -->"),
    "XSLT": ("<!--", " -->"),
    "CSS": ("/*", " */"),
    "OCaml": ("(*", " *)"),
    "Standard ML": ("(*", " *)"),
    "Pascal": ("(*", " *)"),
    "Isabelle": ("(*", " *)"),
    "Mathematica": ("(*", " *)"),
}
_FALLBACK_COMMENT = ("//", "")


def path_comment(path: str, language: str | None) -> str:
    prefix, suffix = _COMMENT_TOKENS.get(language or "", _FALLBACK_COMMENT)
    return f"{prefix} {path}{suffix}"


def concatenate_with_paths(repo_id: str, ordered_files: Sequence[SourceFile]) -> RepoSample:
    """Concatenate files in the given order; each file contributes a
    path-comment line, its content, and a blank-line separator.
    Byte-for-byte deterministic.
    """
    parts: list[str] = []
    for f in ordered_files:
        parts.append(f"{path_comment(f.path, f.language)}\n{f.content}\n\n")
    return RepoSample(
        repo_id=repo_id,
        ordered_paths=tuple(f.path for f in ordered_files),
        text="".join(parts),
        char_count=sum(map(len, parts)),
    )


def order_repo_files(files: Sequence[SourceFile]) -> tuple[list[SourceFile], list[tuple[str, str]]]:
    """Full ordering pass for one repository: extract references, build
    the graph, sort, and return files in emission order plus the edge
    list (dependent, dependency) for optional dumping.
    """
    paths = [f.path for f in files]
    by_path = {f.path: f for f in files}
    edges: list[tuple[str, str]] = []
    for f in files:
        for dep in extract_dependencies(f, paths):
            edges.append((f.path, dep))
    graph = build_graph(paths, edges)
    ordered: list[SourceFile] = []
    for subgraph in topological_sort(graph):
        ordered.extend(by_path[p] for p in subgraph)
    return ordered, edges
