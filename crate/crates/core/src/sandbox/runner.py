"""Child-side runner for generated scaffolds.

Invoked as: python3 -I -B runner.py <scaffold.py> <config.json>

Speaks the line protocol in docs/bridge-protocol.md over its original
stdout/stdin. The scaffold's own stdout and stdin are detached from the
protocol streams.
"""

import ast
import builtins
import inspect
import io
import json
import os
import sys


def _main():
    scaffold_path, config_path = sys.argv[1], sys.argv[2]
    with open(scaffold_path, encoding="utf-8") as fh:
        source = fh.read()
    with open(config_path, encoding="utf-8") as fh:
        config = json.load(fh)

    proto_out = io.TextIOWrapper(os.fdopen(os.dup(1), "wb"), encoding="utf-8", newline="\n", write_through=True)
    proto_in = io.TextIOWrapper(os.fdopen(os.dup(0), "rb"), encoding="utf-8", newline="\n")
    devnull = os.open(os.devnull, os.O_RDWR)
    os.dup2(devnull, 0)
    os.dup2(devnull, 1)
    sys.stdin = open(os.devnull, encoding="utf-8")
    sys.stdout = open(os.devnull, "w", encoding="utf-8")

    def send(tag, payload):
        proto_out.write(tag + " " + json.dumps(payload, ensure_ascii=True) + "\n")
        proto_out.flush()

    option_ids = config.get("option_ids") or []
    option_set_aware = bool(config.get("option_set_aware"))

    def extract_answer(response=None, *args, **kwargs):
        text = "" if response is None else str(response)
        n = len(text)
        for i, c in enumerate(text):
            if not ("A" <= c <= "Z"):
                continue
            if i > 0 and text[i - 1].isalnum():
                continue
            if i + 1 < n and text[i + 1].isalnum():
                continue
            if option_set_aware and c not in option_ids:
                continue
            return c
        return "X"

    def llm_model(prompt=None, exp_config=None, *args, **kwargs):
        send("CALL", "" if prompt is None else str(prompt))
        line = proto_in.readline()
        if not line.startswith("RESP "):
            os._exit(3)
        return json.loads(line[5:])

    _limit_resources(config)
    _install_guard(os.path.realpath(os.getcwd()))

    try:
        result = _run(source, config.get("exp_config", {}), llm_model, extract_answer)
    except SyntaxError as exc:
        send("ERR", {"type": "SyntaxError", "mro": ["SyntaxError", "Exception"], "message": str(exc), "phase": "compile"})
        return
    except BaseException as exc:  # noqa: BLE001
        mro = [k.__name__ for k in type(exc).__mro__]
        send("ERR", {"type": type(exc).__name__, "mro": mro, "message": str(exc)[:2000], "phase": "run"})
        return
    send("RET", _jsonable_triple(result))


def _jsonable(value):
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    try:
        return int(value)
    except Exception:  # noqa: BLE001
        return repr(value)


def _jsonable_triple(result):
    if isinstance(result, (tuple, list)):
        return [_jsonable(v) for v in result]
    return {"not_a_sequence": type(result).__name__}


def _run(source, exp_config, llm_model, extract_answer):
    tree = ast.parse(source, filename="scaffold.py")
    namespace = {
        "__name__": "scaffold",
        "__builtins__": builtins,
        "llm_model": llm_model,
        "extract_answer": extract_answer,
        "exp_config": exp_config,
    }
    try:
        code = compile(tree, "scaffold.py", "exec")
    except SyntaxError as exc:
        if "outside function" not in str(exc):
            raise
        # top-level `return`: treat the whole module as a function body
        wrapper = ast.parse("def __scaffold_entry__(exp_config):\n    pass\n")
        wrapper.body[0].body = tree.body
        ast.fix_missing_locations(wrapper)
        exec(compile(wrapper, "scaffold.py", "exec"), namespace)
        return namespace["__scaffold_entry__"](exp_config)

    exec(code, namespace)
    entry = namespace.get("solve")
    if not callable(entry):
        defined = [
            node.name
            for node in tree.body
            if isinstance(node, ast.FunctionDef) and node.name not in ("llm_model", "extract_answer")
        ]
        if len(defined) == 1:
            entry = namespace[defined[0]]
    if callable(entry):
        try:
            takes_arg = len(inspect.signature(entry).parameters) >= 1
        except (TypeError, ValueError):
            takes_arg = True
        return entry(exp_config) if takes_arg else entry()
    names = ("solverLLM_answer", "genLLM_answer", "genLLM_difficulty")
    if all(n in namespace for n in names):
        return tuple(namespace[n] for n in names)
    return None


def _limit_resources(config):
    try:
        import resource
    except ImportError:
        return
    mem = int(config.get("memory_limit_bytes", 1 << 30))
    cpu = int(config.get("cpu_limit_s", 130))
    for what, value in (
        (resource.RLIMIT_AS, mem),
        (resource.RLIMIT_CPU, cpu),
        (resource.RLIMIT_FSIZE, 16 << 20),
        (resource.RLIMIT_CORE, 0),
    ):
        try:
            soft, hard = resource.getrlimit(what)
            cap = value if hard == resource.RLIM_INFINITY else min(value, hard)
            resource.setrlimit(what, (cap, hard))
        except (ValueError, OSError):
            pass


_BLOCKED_PREFIXES = (
    "socket.",
    "subprocess.",
    "os.system",
    "os.exec",
    "os.spawn",
    "os.posix_spawn",
    "os.fork",
    "os.forkpty",
    "os.kill",
    "os.killpg",
    "os.putenv",
    "os.unsetenv",
    "os.chdir",
    "ctypes.",
    "pty.",
    "urllib.",
    "http.client.",
    "ftplib.",
    "smtplib.",
    "webbrowser.",
    "sys.addaudithook",
    "sys.settrace",
    "sys.setprofile",
)

_PATH_EVENTS = {
    "os.remove": (0,),
    "os.rmdir": (0,),
    "os.mkdir": (0,),
    "os.rename": (0, 1),
    "os.replace": (0, 1),
    "os.link": (0, 1),
    "os.symlink": (0, 1),
    "os.truncate": (0,),
    "os.chmod": (0,),
    "os.chown": (0,),
    "os.utime": (0,),
    "shutil.rmtree": (0,),
    "shutil.copyfile": (1,),
    "shutil.move": (1,),
}

_WRITE_FLAGS = os.O_WRONLY | os.O_RDWR | os.O_CREAT | os.O_APPEND | os.O_TRUNC


def _install_guard(scratch):
    realpath = os.path.realpath
    fspath = os.fspath

    def inside(path):
        if isinstance(path, int):
            return True
        try:
            resolved = realpath(fspath(path))
        except Exception:  # noqa: BLE001
            return False
        return resolved == scratch or resolved.startswith(scratch + os.sep)

    def hook(event, args):
        if event.startswith(_BLOCKED_PREFIXES):
            raise PermissionError("sandbox: " + event + " is not permitted")
        if event == "open":
            path, mode, flags = (list(args) + [None, None, None])[:3]
            writing = (isinstance(mode, str) and any(c in mode for c in "wax+")) or (
                isinstance(flags, int) and flags & _WRITE_FLAGS
            )
            if writing and not inside(path):
                raise PermissionError("sandbox: write outside scratch directory")
            return
        positions = _PATH_EVENTS.get(event)
        if positions:
            for i in positions:
                if i < len(args) and not inside(args[i]):
                    raise PermissionError("sandbox: " + event + " outside scratch directory")

    sys.addaudithook(hook)


if __name__ == "__main__":
    _main()
