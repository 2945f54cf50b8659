"""Command-line interface: ``fsencrypt <command> ...``.

Exit codes:

====  ======================================
0     success
2     usage error
3     file could not be read or written
4     symbol outside the alphabet
5     key exhausted
6     plain-text does not fit the fixed rate
7     malformed container or spec file
8     binned decoding failed
9     exhaustive search guard exceeded
10    verification failed
====  ======================================
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bounds, condlz, fsm, lossy, lz78, report, schemes
from .errors import (AlphabetError, GuardExceededError, KeyExhaustedError,
                     MalformedStreamError, RateOverflowError)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_ALPHABET = 4
EXIT_KEY = 5
EXIT_RATE = 6
EXIT_MALFORMED = 7
EXIT_DECODE = 8
EXIT_GUARD = 9
EXIT_VERIFY = 10

MODES = {
    "variable": schemes.Mode.VARIABLE,
    "fixed": schemes.Mode.FIXED_RATE,
    "conditional": schemes.Mode.CONDITIONAL,
    "binned": schemes.Mode.BINNED,
}


class UsageError(Exception):
    pass


class DecodeError(Exception):
    pass


class VerificationFailed(Exception):
    pass


# -- symbol files ------------------------------------------------------------

def symbol_format(args) -> str:
    if args.symbols != "auto":
        return args.symbols
    return "bits" if args.alpha == 2 else "bytes"


def read_symbols(path: str, alpha: int, fmt: str) -> list[int]:
    data = Path(path).read_bytes()
    if fmt == "bits":
        if alpha != 2:
            raise UsageError("bit-wise reading needs --alpha 2")
        value = int.from_bytes(data, "big")
        n = 8 * len(data)
        x = [int(ch) for ch in format(value, f"0{n}b")] if n else []
    elif fmt == "bytes":
        if alpha > 256:
            raise UsageError("byte-wise reading needs --alpha <= 256")
        x = list(data)
    else:
        text = data.decode("ascii", errors="replace")
        x = []
        for ch in text:
            if ch.isspace():
                continue
            if not ch.isdigit():
                raise AlphabetError(f"{path}: character {ch!r} is not a digit symbol")
            x.append(int(ch))
    if not x:
        raise UsageError(f"{path}: no symbols")
    lz78.check_alphabet(x, alpha)
    return x


def write_symbols(path: str, x: list[int], alpha: int, fmt: str) -> None:
    if fmt == "bits":
        pad = -len(x) % 8
        value = int("".join("01"[b] for b in x) + "0" * pad, 2)
        data = value.to_bytes((len(x) + pad) // 8, "big")
    elif fmt == "bytes":
        data = bytes(x)
    else:
        data = ("".join(str(a) for a in x) + "\n").encode()
    Path(path).write_bytes(data)


# -- key files ---------------------------------------------------------------

def _sidecar(key: str) -> Path:
    return Path(key + ".offset")


def key_offset(args) -> int:
    """Starting byte offset: ``--key-offset`` if given, else the sidecar, else 0."""
    if args.key_offset is not None:
        if args.key_offset < 0:
            raise UsageError("--key-offset must be non-negative")
        return args.key_offset
    side = _sidecar(args.key)
    if side.exists():
        text = side.read_text().strip()
        if not text.isdigit():
            raise MalformedStreamError(f"{side}: bad offset {text!r}")
        return int(text)
    return 0


def open_key(args) -> tuple[fsm.KeyTape, int]:
    if not args.key:
        raise UsageError("--key is required")
    data = Path(args.key).read_bytes()
    offset = key_offset(args)
    if offset > len(data):
        raise KeyExhaustedError(f"key offset {offset} beyond the {len(data)}-byte key")
    return fsm.KeyTape.from_bytes(data, start=8 * offset), offset


def advance_key(key: str, offset: int, consumed_bits: int) -> int:
    """Store the new byte offset; the cursor moves in whole bytes."""
    new = offset + (consumed_bits + 7) // 8
    side = _sidecar(key)
    tmp = side.with_name(side.name + ".tmp")
    tmp.write_text(f"{new}\n")
    os.replace(tmp, side)
    return new


# -- commands ----------------------------------------------------------------

def _emit(args, obj: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print("\n".join(text_lines))


def cmd_analyze(args) -> int:
    fmt = symbol_format(args)
    x = read_symbols(args.input, args.alpha, fmt)
    p = lz78.parse(x)
    obj = {"n": len(x), "c": p.count, "rho_lz": p.complexity}
    lines = [f"n={len(x)}", f"c={p.count}", f"rho_lz={p.complexity:.4f}"]
    if args.si:
        s = read_symbols(args.si, args.alpha, fmt)
        if len(s) != len(x):
            raise UsageError(f"side information has {len(s)} symbols, input has {len(x)}")
        j = condlz.joint_parse(x, s)
        obj.update(c_xs=j.joint_count, c_s=j.si_count,
                   group_counts=[j.per_phrase_counts[k] for k in sorted(j.per_phrase_counts)],
                   rho_lz_cond=j.conditional_complexity)
        lines += [f"c(x,s)={j.joint_count}", f"c(s)={j.si_count}",
                  "group counts=" + ",".join(str(obj["group_counts"][i]) for i in range(j.si_count)),
                  f"rho_lz(x|s)={j.conditional_complexity:.4f}"]
    _emit(args, obj, lines)
    return EXIT_OK


def _bins(args) -> schemes.BinAssignment:
    if args.rate is None:
        raise UsageError("--rate is required")
    return schemes.BinAssignment(args.seed, args.rate)


def cmd_encrypt(args) -> int:
    fmt = symbol_format(args)
    x = read_symbols(args.input, args.alpha, fmt)
    mode = MODES[args.mode]
    tape, offset = open_key(args)
    if mode is schemes.Mode.VARIABLE:
        cg = schemes.otp_lz_encrypt(x, args.alpha, tape)
    elif mode is schemes.Mode.FIXED_RATE:
        if args.rate is None:
            raise UsageError("--rate is required in fixed mode")
        cg = schemes.fixed_rate_encrypt(x, args.alpha, args.rate, tape)
    elif mode is schemes.Mode.CONDITIONAL:
        cg = schemes.cond_otp_encrypt(x, _read_si(args, fmt, len(x)), args.alpha, tape)
    else:
        cg = schemes.binned_encrypt(x, args.alpha, _bins(args), tape)
    Path(args.output).write_bytes(cg.to_bytes())
    new = advance_key(args.key, offset, cg.consumed)
    wasted = 8 * (new - offset) - cg.consumed
    print(f"mode={args.mode} n={cg.n} consumed_bits={cg.consumed} key_rate={cg.key_rate:.4f} "
          f"key_offset={new} wasted_pad_bits={wasted}", file=sys.stderr)
    return EXIT_OK


def _read_si(args, fmt, n):
    if not args.si:
        raise UsageError("--si is required in this mode")
    s = read_symbols(args.si, args.alpha, fmt)
    if len(s) != n:
        raise UsageError(f"side information has {len(s)} symbols, expected {n}")
    return s


def cmd_decrypt(args) -> int:
    blob = Path(args.input).read_bytes()
    cg = schemes.Cryptogram.from_bytes(blob)
    args.alpha = cg.alpha
    fmt = symbol_format(args)
    tape, offset = open_key(args)
    if cg.mode is schemes.Mode.VARIABLE:
        x = schemes.otp_lz_decrypt(cg, tape)
    elif cg.mode is schemes.Mode.FIXED_RATE:
        x = schemes.fixed_rate_decrypt(cg, tape)
    elif cg.mode is schemes.Mode.CONDITIONAL:
        x = schemes.cond_otp_decrypt(cg, _read_si(args, fmt, cg.n), tape)
    else:
        s = _read_si(args, fmt, cg.n)
        res = schemes.binned_decrypt(cg, s, schemes.BinAssignment(cg.seed, cg.rate), args.eps, tape)
        if not res.ok:
            raise DecodeError(f"{res.status}: {res.candidates} candidates in the bin")
        x = list(res.x)
    if tape.consumed != cg.consumed:
        raise MalformedStreamError(
            f"container declares {cg.consumed} key bits, decryption used {tape.consumed}")
    write_symbols(args.output, x, cg.alpha, fmt)
    new = advance_key(args.key, offset, cg.consumed)
    print(f"mode={cg.mode.name.lower()} n={cg.n} consumed_bits={cg.consumed} "
          f"key_rate={cg.key_rate:.4f} key_offset={new}", file=sys.stderr)
    return EXIT_OK


def _block_arg(value: str):
    if value == "auto":
        return None
    m = int(value)
    if m < 1:
        raise UsageError("--block must be positive")
    return m


def cmd_bounds(args) -> int:
    x = read_symbols(args.input, args.alpha, symbol_format(args))
    m = _block_arg(args.block)
    if not args.sweep:
        rep = bounds.sigma_lower_bound(x, args.states, args.alpha, m)
        if args.format == "csv":
            text = bounds.reports_to_csv([(Path(args.input).name, rep)])
        else:
            text = rep.to_json() + "\n"
        _write_or_print(args.output, text)
        return EXIT_OK
    ns = [1 << k for k in range(4, 64) if (1 << k) <= len(x)]
    if not ns:
        raise UsageError("input too short for a sweep (need at least 16 symbols)")
    rows = [(f"{Path(args.input).name}[:{n}]", bounds.sigma_lower_bound(x[:n], args.states, args.alpha, m))
            for n in ns]
    text = bounds.reports_to_csv(rows)
    _write_or_print(args.output, text)
    if args.output:
        report.plot_sigma_sweep([r.csv_row(i) for i, r in rows], _figure_path(args.output))
    return EXIT_OK


def _write_or_print(path, text):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _figure_path(output: str) -> Path:
    return Path(output).with_suffix(".png")


def load_machine(ref: str, alpha: int) -> fsm.EncrypterSpec:
    if ref.startswith("builtin:"):
        try:
            return schemes.builtin_spec(ref[len("builtin:"):], alpha)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc).strip("'\"")) from None
    text = Path(ref).read_text()
    try:
        return fsm.load_spec(text, name=Path(ref).stem)
    except ValueError as exc:
        raise MalformedStreamError(str(exc)) from None


def _window_arg(value: str | None, n: int):
    if value is None:
        return None
    try:
        a, b = (int(v) for v in value.split(":"))
    except ValueError:
        raise UsageError(f"--window expects A:B, got {value!r}") from None
    if not 1 <= a <= b <= n:
        raise UsageError(f"window {a}:{b} not inside 1..{n}")
    return a, b


def cmd_verify(args) -> int:
    spec = load_machine(args.spec, args.alpha)
    window = _window_arg(args.window, args.n)
    il = fsm.check_information_lossless(spec, args.n)
    if window is None:
        verdicts = fsm.secrecy_sweep(spec, args.n)
        failing = [v for v in verdicts if not v]
        sec = failing[0] if failing else verdicts[-1]
    else:
        sec = fsm.check_perfect_secrecy(spec, args.n, window)
    lines = [f"spec: {spec.name or args.spec} ({spec.n_states} states, alpha={spec.alpha})",
             f"IL: {'yes' if il else 'no'} (n <= {args.n})"]
    if not il:
        n, xa, xb, key, outs, zf = il.witness
        lines.append(f"  witness: x={_seq(xa)} and x'={_seq(xb)} give words {_words(outs)} "
                     f"and final state {zf}")
    lines.append(f"SECURE: {'yes' if sec else 'no'} (n={args.n}, "
                 f"{'all windows' if window is None and sec else 'window %d:%d' % sec.window})")
    if not sec:
        xa, xb, words, pa, pb = sec.witness
        lines.append(f"  witness: words {_words(words)} have probability {pa} given x={_seq(xa)} "
                     f"but {pb} given x={_seq(xb)}")
    obj = {"spec": spec.name or args.spec, "n": args.n, "il": bool(il), "secure": bool(sec),
           "window": list(sec.window)}
    _emit(args, obj, lines)
    if not (il and sec):
        raise VerificationFailed()
    return EXIT_OK


def _seq(x) -> str:
    return "".join(str(a) for a in x) if all(a < 10 for a in x) else ",".join(map(str, x))


def _words(words) -> str:
    return "(" + ", ".join(str(w) for w in words) + ")"


def _distortion(args, alpha: int) -> lossy.DistortionMeasure:
    if args.distortion == "hamming":
        return lossy.hamming(alpha)
    rows = []
    for line in Path(args.distortion).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            rows.append(tuple(float(v) for v in line.replace(",", " ").split()))
    try:
        return lossy.DistortionMeasure(tuple(rows), name=Path(args.distortion).stem)
    except ValueError as exc:
        raise MalformedStreamError(f"{args.distortion}: {exc}") from None


def cmd_sweep(args) -> int:
    if args.kind == "redundancy":
        states = [int(v) for v in args.states_list.split(",")]
        exps = list(range(args.n_min, args.n_max + 1, args.n_step))
        if not exps or min(exps) < 1:
            raise UsageError("need 1 <= --n-min <= --n-max")
        rows = report.redundancy_rows(states, exps, args.alpha)
        header, schema, plot = report.REDUNDANCY_COLUMNS, report.REDUNDANCY_SCHEMA, report.plot_redundancy
    else:
        if not args.input:
            raise UsageError("rd sweep needs an input file")
        x = read_symbols(args.input, args.alpha, symbol_format(args))
        d = _distortion(args, args.alpha)
        levels = [float(v) for v in args.levels.split(",")]
        points = []
        for D in levels:
            try:
                points.append(lossy.rd_oracle(x, D, d))
            except GuardExceededError:
                points.append(lossy.rd_heuristic(x, D, d, budget=args.budget, seed=args.seed))
        rows = report.rd_rows(points, len(x))
        header, schema = report.RD_COLUMNS, report.RD_SCHEMA
        plot = lambda _rows, path: report.plot_rd(points, path, Path(args.input).name)
    if args.output:
        report.write_csv(args.output, schema, header, rows)
        plot(rows, _figure_path(args.output))
    else:
        print(f"# schema: {schema}")
        print(",".join(header))
        for r in rows:
            print(",".join(str(v) for v in r))
    return EXIT_OK


def cmd_gen_key(args) -> int:
    if args.bytes < 1:
        raise UsageError("--bytes must be positive")
    path = Path(args.output)
    if path.exists() and not args.force:
        raise UsageError(f"{path} exists; pass --force to overwrite")
    path.write_bytes(os.urandom(args.bytes))
    side = _sidecar(str(path))
    if side.exists():
        side.unlink()
    print(f"wrote {args.bytes} key bytes to {path}", file=sys.stderr)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fsencrypt", description="Finite-state encryption toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, symbols=True):
        sp.add_argument("--alpha", type=int, default=2, help="alphabet size (default 2)")
        if symbols:
            sp.add_argument("--symbols", choices=("auto", "bits", "bytes", "text"), default="auto",
                            help="how files map to symbols; auto = bits for alpha 2, else bytes")
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")

    def keyed(sp):
        sp.add_argument("--key", required=True, help="key file (raw bytes)")
        sp.add_argument("--key-offset", type=int, default=None,
                        help="start byte in the key file (default: the KEY.offset sidecar, else 0)")

    sp = sub.add_parser("analyze", help="LZ complexity, optionally given side information")
    sp.add_argument("input")
    sp.add_argument("--si", help="side-information file")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("encrypt", help="compress and pad a file")
    sp.add_argument("input")
    sp.add_argument("output")
    sp.add_argument("--mode", choices=tuple(MODES), default="variable")
    sp.add_argument("--rate", type=float, help="bits per symbol (fixed and binned modes)")
    sp.add_argument("--seed", type=int, default=0, help="bin hash seed (binned mode)")
    sp.add_argument("--si", help="side-information file (conditional mode)")
    keyed(sp)
    common(sp)
    sp.set_defaults(func=cmd_encrypt)

    sp = sub.add_parser("decrypt", help="recover a file from a container")
    sp.add_argument("input")
    sp.add_argument("output")
    sp.add_argument("--si", help="side-information file (conditional and binned modes)")
    sp.add_argument("--eps", type=float, default=0.1, help="complexity margin for binned decoding")
    keyed(sp)
    common(sp)
    sp.set_defaults(func=cmd_decrypt)

    sp = sub.add_parser("bounds", help="key-rate lower bound for s-state encrypters")
    sp.add_argument("input")
    sp.add_argument("--states", type=int, default=1, help="number of encrypter states s")
    sp.add_argument("--block", default="auto", help="block length m, or auto")
    sp.add_argument("--sweep", action="store_true", help="evaluate on power-of-two prefixes")
    sp.add_argument("--output", help="write CSV/JSON here (and a .png figure for sweeps)")
    common(sp)
    sp.set_defaults(func=cmd_bounds, format="json")

    sp = sub.add_parser("verify", help="exhaustive IL and secrecy check of a machine")
    sp.add_argument("spec", help="spec file or builtin:NAME")
    sp.add_argument("--n", type=int, default=4, help="plain-text length")
    sp.add_argument("--window", help="A:B window of output words (default: every window)")
    common(sp, symbols=False)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="redundancy or rate-distortion sweeps to CSV and PNG")
    sp.add_argument("kind", choices=("redundancy", "rd"))
    sp.add_argument("input", nargs="?", help="input file (rd sweeps)")
    sp.add_argument("--states", dest="states_list", default="1,2,4")
    sp.add_argument("--n-min", type=int, default=10, help="smallest log2 n")
    sp.add_argument("--n-max", type=int, default=20, help="largest log2 n")
    sp.add_argument("--n-step", type=int, default=2)
    sp.add_argument("--distortion", default="hamming", help="hamming or a cost-table file")
    sp.add_argument("--levels", default="0,0.125,0.25,0.5,1")
    sp.add_argument("--budget", type=int, default=10_000, help="local-search steps beyond the oracle guard")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", help="CSV path; a .png figure is written next to it")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("gen-key", help="write OS randomness to a key file")
    sp.add_argument("output")
    sp.add_argument("--bytes", type=int, required=True)
    sp.add_argument("--force", action="store_true")
    sp.set_defaults(func=cmd_gen_key)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, f"usage error: {exc}")
    except AlphabetError as exc:
        return _fail(EXIT_ALPHABET, f"alphabet error: {exc}")
    except KeyExhaustedError as exc:
        return _fail(EXIT_KEY, f"KEY_EXHAUSTED: {exc}")
    except RateOverflowError as exc:
        return _fail(EXIT_RATE, f"RATE_OVERFLOW: {exc}")
    except MalformedStreamError as exc:
        return _fail(EXIT_MALFORMED, f"malformed input: {exc}")
    except DecodeError as exc:
        return _fail(EXIT_DECODE, f"DECODE_ERROR: {exc}")
    except GuardExceededError as exc:
        return _fail(EXIT_GUARD, f"guard exceeded: {exc}")
    except VerificationFailed:
        return EXIT_VERIFY
    except OSError as exc:
        return _fail(EXIT_IO, f"I/O error: {exc}")
    except ValueError as exc:
        return _fail(EXIT_USAGE, f"error: {exc}")


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
