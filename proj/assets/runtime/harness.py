"""Runs one generated program and reports its answer over a sentinel-framed
stdout channel.

argv: harness.py <user_code.py> <sentinel> <convention>

The program's own stdout is captured while it runs and re-emitted (capped at
1 MiB) before the payload block, so user prints can never collide with the
framing markers. The payload is a single JSON object:

    {"status": ..., "value": ..., "repr": ...}

status: ok | syntax_error | runtime_error | no_answer | sandbox_error
value:  int/float/bool/str pass through; anything else is repr()'d.
"""
import io
import json
import math
import sys

USER_STDOUT_CAP = 1 << 20


def jsonable(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        # ints beyond 2**53 would silently lose precision as doubles
        return value if -(2 ** 53) < value < 2 ** 53 else repr(value)
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, str):
        return value
    return repr(value)


def emit(captured, sentinel, payload):
    text = captured.getvalue()
    if len(text) > USER_STDOUT_CAP:
        text = text[:USER_STDOUT_CAP]
    out = sys.stdout
    out.write(text)
    out.write("\n%s:BEGIN\n" % sentinel)
    out.write(json.dumps(payload))
    out.write("\n%s:END\n" % sentinel)
    out.flush()


def main():
    code_path, sentinel, convention = sys.argv[1], sys.argv[2], sys.argv[3]
    with open(code_path, "r", encoding="utf-8") as f:
        source = f.read()

    payload = {"status": "ok", "value": None, "repr": ""}
    captured = io.StringIO()

    try:
        compiled = compile(source, "user_code.py", "exec")
    except SyntaxError as e:
        payload["status"] = "syntax_error"
        payload["repr"] = "%s: %s" % (type(e).__name__, e)
        emit(captured, sentinel, payload)
        return

    value = None
    have_value = False
    run_globals = {"__name__": "__main__"}
    real_stdout = sys.stdout
    sys.stdout = captured
    try:
        exec(compiled, run_globals)
        if convention == "answer_variable":
            if "answer" in run_globals:
                value = run_globals["answer"]
                have_value = True
        elif convention == "returned_value":
            fn = run_globals.get("solution")
            if callable(fn):
                value = fn()
                have_value = True
        elif convention == "printed_value":
            text = captured.getvalue()
            if text.strip():
                value = text.rstrip("\r\n").split("\n")[-1].rstrip("\r")
                have_value = True
        else:
            payload["status"] = "sandbox_error"
            payload["repr"] = "unknown answer convention: %r" % convention
    except BaseException as e:  # the payload must be written no matter what
        payload["status"] = "runtime_error"
        try:
            payload["repr"] = "%s: %s" % (type(e).__name__, e)
        except Exception:
            payload["repr"] = type(e).__name__
    finally:
        sys.stdout = real_stdout

    if payload["status"] == "ok":
        if not have_value:
            payload["status"] = "no_answer"
        else:
            payload["value"] = jsonable(value)
            try:
                payload["repr"] = repr(value)
            except Exception:
                payload["repr"] = "<repr failed>"

    emit(captured, sentinel, payload)


if __name__ == "__main__":
    main()
