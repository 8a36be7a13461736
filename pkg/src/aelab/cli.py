"""Command-line entry point wiring parameters, protocol, wire emulation,
and attacks into reproducible experiments.

Every subcommand is deterministic for a fixed --seed and parameter file;
reports are line-oriented "key value" text (hex for cryptographic
material).  Wall-clock lines are opt-in via --timings so that default
reports stay byte-stable.

Exit codes: 0 success, 1 protocol failure, 2 attack failure, 3 usage.
"""

import argparse
import hashlib
import sys
import time
from random import Random

from .algebra import Permutation
from .attacks import (
    InProcessTag,
    WireTag,
    attack1_collect,
    attack1_impersonate,
    attack2_collect_all,
    attack2_impersonate,
    attack3_recover_kt,
    attack4_impersonate,
    attack5_mitm,
    build_lookup_table,
    mitm_cost,
    oracle_factor,
    sample_honest_sigma,
)
from .errors import (
    GenerationFailure,
    NeedMoreBytes,
    NotInSubgroup,
    ParseError,
    ProtocolError,
    SearchExhausted,
    SigmaMismatch,
)
from .netio import TagServer, interrogate, interrogate_full_secret
from .params import (
    DEFAULT_CONJ_COUNT,
    DEFAULT_CONJ_LENGTH,
    DEFAULT_Z_LENGTH,
    generate_params,
    load_params,
    save_params,
    validate_params,
)
from .protocol import (
    Challenge,
    compute_shared,
    extract_token,
    full_secret_challenges,
    keygen_interrogator,
    keygen_tag,
    load_keypair,
    save_keypair,
    serialize_shared,
    verify_token,
)

EXIT_OK = 0
EXIT_PROTOCOL = 1
EXIT_ATTACK = 2
EXIT_USAGE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class Report:
    """Accumulates "key value" lines for stdout or --report."""

    def __init__(self):
        self.lines: list[str] = []

    def add(self, key, value):
        if isinstance(value, bool):
            value = "true" if value else "false"
        self.lines.append(f"{key} {value}")

    def emit(self, path: str | None):
        text = "\n".join(self.lines) + "\n"
        if path:
            with open(path, "w") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def _validation_lines(report, params, rep: Report) -> None:
    rep.add("ok", not report.failures)
    rep.add("n", params.n)
    rep.add("modulus", f"0x{params.modulus:X}")
    rep.add("conj_c", len(params.conj_c))
    rep.add("conj_d", len(params.conj_d))
    rep.add("c_fixed_points", " ".join(str(x + 1) for x in sorted(report.c_fixed_points)) or "-")
    rep.add("d_fixed_points", " ".join(str(x + 1) for x in sorted(report.d_fixed_points)) or "-")
    rep.add("d_subgroup_order", report.d_subgroup_order if report.d_subgroup_order else "unknown")
    rep.add("failures", " ".join(report.failures) or "-")


def cmd_params_gen(args) -> int:
    rng = Random(args.seed)
    params = generate_params(
        args.n,
        rng,
        z_length=args.z_length,
        conj_length=args.conj_length,
        conj_count=args.conj_count,
    )
    save_params(params, args.out)
    rep = Report()
    rep.add("written", args.out)
    _validation_lines(validate_params(params), params, rep)
    rep.emit(args.report)
    return EXIT_OK


def cmd_params_validate(args) -> int:
    params = load_params(args.params)
    report = validate_params(params)
    rep = Report()
    _validation_lines(report, params, rep)
    rep.emit(args.report)
    return EXIT_OK if report.ok else EXIT_PROTOCOL


def cmd_keygen(args) -> int:
    params = load_params(args.params)
    rng = Random(args.seed)
    keygen = keygen_tag if args.side == "tag" else keygen_interrogator
    kp = keygen(params, rng, args.conj_count)
    save_keypair(kp, args.side, args.out)
    rep = Report()
    rep.add("written", args.out)
    rep.add("side", args.side)
    rep.add("pub_matrix_digest", _digest(kp.pub.m.data))
    rep.add("pub_sigma", kp.pub.sigma.to_text())
    rep.emit(args.report)
    return EXIT_OK


def cmd_auth(args) -> int:
    params = load_params(args.params)
    rng = Random(args.seed)
    tag = keygen_tag(params, rng)
    inter = keygen_interrogator(params, rng)
    tag_side = compute_shared(tag, inter.pub, params)
    int_side = compute_shared(inter, tag.pub, params)
    agreement = tag_side == int_side
    ch = Challenge(args.s, args.l)
    token = None
    verified = False
    if agreement:
        token = extract_token(serialize_shared(tag_side.m), ch)
        verified = verify_token(int_side, ch, token)
    rep = Report()
    rep.add("agreement", agreement)
    rep.add("challenge_s", ch.s)
    rep.add("challenge_l", ch.l)
    rep.add("token", token.data.hex() if token and token.data else "-")
    rep.add("verified", verified)
    rep.add("shared_digest", _digest(serialize_shared(int_side.m)))
    rep.emit(args.report)
    return EXIT_OK if agreement and verified else EXIT_PROTOCOL


def cmd_tag_serve(args) -> int:
    params = load_params(args.params)
    if args.keypair:
        kp, side = load_keypair(args.keypair)
        if side != "tag":
            print("error: keypair file is not a tag keypair", file=sys.stderr)
            return EXIT_USAGE
    else:
        kp = keygen_tag(params, Random(args.seed), args.conj_count,
                        conj_pool=params.conj_c[: args.conj_pool] if args.conj_pool else None)
    server = TagServer(params, kp, args.host, args.port)
    print(f"listening {server.host} {server.port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_interrogate(args) -> int:
    params = load_params(args.params)
    rng = Random(args.seed)
    rep = Report()
    if args.full_secret:
        assembled, expected, _ = interrogate_full_secret(args.host, args.port, params, rng)
        rep.add("full_secret", assembled.hex())
        rep.add("windows", len(full_secret_challenges(params.n)))
        rep.add("match", assembled == expected)
        rep.emit(args.report)
        return EXIT_OK if assembled == expected else EXIT_PROTOCOL
    challenge = None
    if args.l is not None or args.s != 0:
        challenge = Challenge(args.s, args.l if args.l is not None else 255)
    result = interrogate(args.host, args.port, params, rng, challenge)
    rep.add("accepted", result.accepted)
    rep.add("challenge_s", result.challenge.s)
    rep.add("challenge_l", result.challenge.l)
    rep.add("vacuous", result.vacuous)
    rep.add("token", result.token.data.hex() or "-")
    rep.emit(args.report)
    if not result.accepted:
        for line in result.transcript:
            print(line, file=sys.stderr)
        return EXIT_PROTOCOL
    return EXIT_OK


# -- attack drivers ------------------------------------------------------------


def _make_oracle(args, params):
    """In-process target by default; wire target when --host is given."""
    if args.host:
        return WireTag(args.host, args.port, params.n), None
    keypair = keygen_tag(params, Random(args.tag_seed))
    return InProcessTag(params, keypair), keypair


def _honest_session(params, rng, tag_pub):
    inter = keygen_interrogator(params, rng)
    total = 8 * params.n * (params.n - 1)
    s = rng.randrange(params.n * (params.n - 1))
    ch = Challenge(s, rng.randrange(1, min(256, total - 8 * s + 1)))
    expected = compute_shared(inter, tag_pub, params)
    return inter, ch, expected


def cmd_attack_basic(args) -> int:
    params = load_params(args.params)
    rng = Random(args.seed)
    oracle, _ = _make_oracle(args, params)
    if args.sigma_rank is not None:
        sigma = Permutation.unrank(args.sigma_rank, params.n)
    else:
        sigma = sample_honest_sigma(params, rng)
    started = time.perf_counter()
    table = attack1_collect(oracle, sigma, params)
    collect_seconds = time.perf_counter() - started
    tag_pub = oracle.public_key()

    matches = successes = 0
    for _ in range(args.sessions):
        inter, ch, expected = _honest_session(params, rng, tag_pub)
        try:
            token = attack1_impersonate(table, inter.pub, ch, params)
        except SigmaMismatch:
            continue
        matches += 1
        successes += verify_token(expected, ch, token)

    rep = Report()
    rep.add("attack", "basic")
    rep.add("sigma", sigma.to_text())
    rep.add("queries", oracle.runs)
    rep.add("storage_bits", table.storage_bits)
    rep.add("sessions", args.sessions)
    rep.add("matches", matches)
    rep.add("match_successes", successes)
    rep.add("success_rate", f"{matches / args.sessions:.6f}" if args.sessions else "-")
    rep.add("success", matches == successes)
    if args.timings:
        rep.add("collect_ms", f"{1000 * collect_seconds:.3f}")
    rep.emit(args.report)
    return EXIT_OK if matches == successes else EXIT_ATTACK


def cmd_attack_full_span(args) -> int:
    params = load_params(args.params)
    rng = Random(args.seed)
    oracle, _ = _make_oracle(args, params)
    tables = attack2_collect_all(oracle, params)
    tag_pub = oracle.public_key()
    successes = 0
    for _ in range(args.sessions):
        inter, ch, expected = _honest_session(params, rng, tag_pub)
        token = attack2_impersonate(tables, inter.pub, ch, params)
        successes += verify_token(expected, ch, token)
    rep = Report()
    rep.add("attack", "full-span")
    rep.add("subgroup_order", len(tables))
    rep.add("queries", oracle.runs)
    rep.add("storage_bits", sum(t.storage_bits for t in tables.values()))
    rep.add("sessions", args.sessions)
    rep.add("successes", successes)
    rep.add("success", successes == args.sessions)
    rep.emit(args.report)
    return EXIT_OK if successes == args.sessions else EXIT_ATTACK


def cmd_attack_recover_kt(args) -> int:
    params = load_params(args.params)
    oracle, ground_truth = _make_oracle(args, params)
    rk = attack3_recover_kt(oracle, params)
    rep = Report()
    rep.add("attack", "recover-kt")
    rep.add("interactions", rk.interactions)
    rep.add("runs", oracle.runs)
    rep.add("kappa", f"{rk.kappa:02x}")
    rep.add("kt", rk.k_t.to_hex())
    ok = True
    if ground_truth is not None:
        ok = rk.k_t == ground_truth.k
        rep.add("match", ok)
    rep.emit(args.report)
    return EXIT_OK if ok else EXIT_ATTACK


def cmd_attack_oracle(args) -> int:
    params = load_params(args.params)
    rng = Random(args.seed)
    table = build_lookup_table(params.d_perms(), params.n)
    valid = 0
    max_len = 0
    for _ in range(args.queries):
        sigma = sample_honest_sigma(params, rng)
        factors = oracle_factor(table, sigma)
        acc = Permutation.identity(params.n)
        for i, e in factors:
            g = table.gens[i]
            acc = acc.compose(g if e > 0 else g.inverse())
        valid += acc == sigma
        max_len = max(max_len, len(factors))
    rep = Report()
    rep.add("attack", "oracle")
    rep.add("table_entries", table.reached)
    rep.add("live_state_words", table.live_state_words)
    rep.add("queries", args.queries)
    rep.add("valid", valid)
    rep.add("max_length", max_len)
    rep.add("success", valid == args.queries)
    if args.timings:
        rep.add("build_ms", f"{1000 * table.build_seconds:.3f}")
    rep.emit(args.report)
    return EXIT_OK if valid == args.queries else EXIT_ATTACK


def cmd_attack_kt_impersonate(args) -> int:
    params = load_params(args.params)
    rng = Random(args.seed)
    oracle, _ = _make_oracle(args, params)
    rk = attack3_recover_kt(oracle, params)
    recover_runs = oracle.runs
    table = build_lookup_table(params.d_perms(), params.n)
    tag_pub = oracle.public_key()
    successes = 0
    online = 0.0
    for _ in range(args.sessions):
        inter, ch, expected = _honest_session(params, rng, tag_pub)
        started = time.perf_counter()
        spoof = attack4_impersonate(rk, tag_pub, inter.pub, table, params)
        online += time.perf_counter() - started
        successes += spoof == expected
    rep = Report()
    rep.add("attack", "kt-impersonate")
    rep.add("recover_runs", recover_runs)
    rep.add("subgroup_order", table.reached)
    rep.add("live_state_words", table.live_state_words)
    rep.add("sessions", args.sessions)
    rep.add("successes", successes)
    rep.add("success", successes == args.sessions)
    if args.timings:
        rep.add("online_ms_avg", f"{1000 * online / max(1, args.sessions):.4f}")
    rep.emit(args.report)
    return EXIT_OK if successes == args.sessions else EXIT_ATTACK


def cmd_attack_mitm(args) -> int:
    params = load_params(args.params)
    conj = params.conj_c[: args.conj_count]
    successes = 0
    word_text = "-"
    table_entries = (2 * args.conj_count) ** args.half_length
    for trial in range(args.trials):
        if args.host:
            oracle = WireTag(args.host, args.port, params.n)
        else:
            keypair = keygen_tag(
                params,
                Random(args.tag_seed + trial),
                conj_count=2 * args.half_length,
                conj_pool=conj,
            )
            oracle = InProcessTag(params, keypair)
        rk = attack3_recover_kt(oracle, params)
        tag_pub = oracle.public_key()
        try:
            word = attack5_mitm(rk, tag_pub, conj, args.half_length, params)
        except SearchExhausted:
            continue
        successes += 1
        word_text = word.to_text()
    full = mitm_cost()
    rep = Report()
    rep.add("attack", "mitm")
    rep.add("conj_count", args.conj_count)
    rep.add("half_length", args.half_length)
    rep.add("table_entries", table_entries)
    rep.add("trials", args.trials)
    rep.add("successes", successes)
    rep.add("success", successes == args.trials)
    rep.add("recovered_word", word_text)
    rep.add("fullscale_table_entries", full["table_entries"])
    rep.add("fullscale_work", full["work_operations"])
    rep.add("fullscale_executed", False)
    rep.emit(args.report)
    return EXIT_OK if successes == args.trials else EXIT_ATTACK


# -- parser ---------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="aelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, params=True, seed=True):
        if params:
            p.add_argument("--params", required=True, help="parameter file")
        if seed:
            p.add_argument("--seed", type=int, default=1, help="rng seed (default 1)")
        p.add_argument("--report", help="write the report here instead of stdout")

    p = sub.add_parser("params-gen", help="generate a parameter file")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--conj-count", type=int, default=DEFAULT_CONJ_COUNT)
    p.add_argument("--z-length", type=int, default=DEFAULT_Z_LENGTH)
    p.add_argument("--conj-length", type=int, default=DEFAULT_CONJ_LENGTH)
    p.add_argument("--report")
    p.set_defaults(func=cmd_params_gen)

    p = sub.add_parser("params-validate", help="validate a parameter file")
    common(p, seed=False)
    p.set_defaults(func=cmd_params_validate)

    p = sub.add_parser("keygen", help="generate a keypair file")
    common(p)
    p.add_argument("--side", choices=("tag", "interrogator"), default="tag")
    p.add_argument("--out", required=True)
    p.add_argument("--conj-count", type=int, default=16)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("auth", help="run one in-process authentication")
    common(p)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--l", type=int, default=255)
    p.set_defaults(func=cmd_auth)

    p = sub.add_parser("tag-serve", help="serve a tag emulator over TCP")
    common(p)
    p.add_argument("--keypair", help="tag keypair file (default: derive from --seed)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--conj-count", type=int, default=16)
    p.add_argument("--conj-pool", type=int, default=0,
                   help="restrict the tag to the first K conjugates (desk-scale targets)")
    p.set_defaults(func=cmd_tag_serve)

    p = sub.add_parser("interrogate", help="authenticate a served tag")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--full-secret", action="store_true",
                   help="read the whole shared secret via the minimal window set")
    p.set_defaults(func=cmd_interrogate)

    attack = sub.add_parser("attack", help="run an attack against a tag")
    asub = attack.add_subparsers(dest="attack", required=True)

    def attack_common(p, sessions=None):
        common(p)
        p.add_argument("--host", help="attack a served tag instead of an in-process one")
        p.add_argument("--port", type=int, default=0)
        p.add_argument("--tag-seed", type=int, default=1000,
                       help="seed for the in-process target tag")
        p.add_argument("--timings", action="store_true", help="include wall-time lines")
        if sessions is not None:
            p.add_argument("--sessions", type=int, default=sessions)

    p = asub.add_parser("basic", help="span-table impersonation (one permutation)")
    attack_common(p, sessions=1000)
    p.add_argument("--sigma-rank", type=int, default=None,
                   help="use the permutation with this rank instead of a sampled one")
    p.set_defaults(func=cmd_attack_basic)

    p = asub.add_parser("full-span", help="span tables for the whole subgroup")
    attack_common(p, sessions=200)
    p.set_defaults(func=cmd_attack_full_span)

    p = asub.add_parser("recover-kt", help="differential private-matrix recovery")
    attack_common(p)
    p.set_defaults(func=cmd_attack_recover_kt)

    p = asub.add_parser("oracle", help="build and exercise the factorization table")
    attack_common(p)
    p.add_argument("--queries", type=int, default=1000)
    p.set_defaults(func=cmd_attack_oracle)

    p = asub.add_parser("kt-impersonate", help="recovered-matrix impersonation")
    attack_common(p, sessions=100)
    p.set_defaults(func=cmd_attack_kt_impersonate)

    p = asub.add_parser("mitm", help="meet-in-the-middle equivalent-key recovery")
    attack_common(p)
    p.add_argument("--conj-count", type=int, default=8,
                   help="size of the conjugate subset (desk scale)")
    p.add_argument("--half-length", type=int, default=2)
    p.add_argument("--trials", type=int, default=1)
    p.set_defaults(func=cmd_attack_mitm)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (ProtocolError, NeedMoreBytes, ConnectionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (SigmaMismatch, NotInSubgroup, SearchExhausted, GenerationFailure) as exc:
        print(f"attack failed: {exc}", file=sys.stderr)
        return EXIT_ATTACK


if __name__ == "__main__":
    sys.exit(main())
