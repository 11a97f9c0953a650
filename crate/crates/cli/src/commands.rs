use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qrpsm_core::compile::compile;
use qrpsm_core::dre::{dre_polynomial, dre_product_plus, product_plus, verify_dre, DreFailure};
use qrpsm_core::funcs::{bits_index, comp, index_bits};
use qrpsm_core::lqr::{
    build_lqr, embed_any, embed_composition, embed_symmetric, embed_weighted, fast_verify_lqr, find_minimal_protocol, lqr_prime,
    synthesize, LinearEmbedding,
};
use qrpsm_core::numtheory::qr_sequence;
use qrpsm_core::paley::{has_star_property_full, has_star_property_reduced, m_values, PaleyStructure};
use qrpsm_core::peralta::{is_n_peralta, peralta_prime, peralta_prime_cached, PeraltaCache};
use qrpsm_core::psm::{execute, fkn_comp, verify_correctness, verify_security, PsmProtocol};
use qrpsm_core::tables::{LQR_PRIMES, PERALTA_PRIMES, QR_SEQUENCES, PROTOCOL_LIST};
use qrpsm_core::{FunctionSpec, LqrProtocol, Polynomial, SignConvention, TruthTable};

use crate::error::CliError;
use crate::{Command, Format, Global, Mode, Outcome};

type Res<T> = std::result::Result<T, CliError>;

pub fn run(g: &Global, cmd: &Command) -> Res<Outcome> {
    match cmd {
        Command::Peralta { n, p } => peralta(g, *n, *p),
        Command::Qrseq { p } => qrseq(g, *p),
        Command::LqrPrime { n, witnesses } => lqr_prime_cmd(g, *n, *witnesses),
        Command::Synth { f, embed } => synth(g, f, embed),
        Command::Minimal { f } => minimal(g, f),
        Command::Verify { protocol, f, mode, budget } => verify(g, protocol, f, *mode, *budget),
        Command::Run { protocol, x, seed } => run_protocol(g, protocol, x, *seed),
        Command::DreCheck { poly, product_plus, p, budget } => dre_check(g, poly.as_deref(), *product_plus, *p, *budget),
        Command::CompileDre { f, poly, no_verify, dump, budget } => compile_dre(g, f, poly, *no_verify, *dump, *budget),
        Command::Paley { p, n, full, edges } => paley(g, *p, *n, *full, *edges),
        Command::PaleyM { n } => paley_m(g, *n),
        Command::Tables { lqr_max_n, exhaustive_max_n } => tables(*lqr_max_n, *exhaustive_max_n, g.format),
    }
}

fn ok(text: String) -> Res<Outcome> {
    Ok(Outcome { text, ok: true })
}

fn conv(g: &Global) -> SignConvention {
    if g.sign_flip {
        SignConvention::Power
    } else {
        SignConvention::Table
    }
}

fn line(v: Value) -> String {
    format!("{v}\n")
}

fn parse_spec(s: &str) -> Res<FunctionSpec> {
    Ok(s.parse::<FunctionSpec>()?)
}

fn boolean_spec(s: &str) -> Res<TruthTable> {
    parse_spec(s)?.truth_table().ok_or_else(|| CliError::Usage(format!("{s} is not a Boolean function; use --protocol fkn")))
}

fn cache_path(g: &Global) -> Option<PathBuf> {
    g.cache.clone().or_else(|| std::env::var_os("QRPSM_CACHE_DIR").map(|d| Path::new(&d).join("peralta-cache")))
}

fn peralta(g: &Global, n: usize, p: Option<u64>) -> Res<Outcome> {
    if let Some(p) = p {
        let holds = is_n_peralta(p, n)?;
        let text = match g.format {
            Format::Json => line(json!({ "n": n, "p": p, "peralta": holds })),
            Format::Lines => format!("{p} {holds}\n"),
            Format::Human => format!("{p} is {}{n}-Peralta\n", if holds { "" } else { "not " }),
        };
        return Ok(Outcome { text, ok: holds });
    }
    let rec = match cache_path(g) {
        Some(path) => {
            let mut cache = PeraltaCache::load(&path);
            let rec = peralta_prime_cached(n, g.max_p, &mut cache)?;
            // The cache is an accelerator only; failing to write it is not an error.
            let _ = cache.save(&path);
            rec
        }
        None => peralta_prime(n, g.max_p)?,
    };
    ok(match g.format {
        Format::Json => line(serde_json::to_value(rec).expect("record serializes")),
        Format::Lines => format!("{} {}\n", rec.n, rec.p),
        Format::Human => format!("P_{} = {}  (sufficient-condition bound {})\n", rec.n, rec.p, if rec.bound_ok { "met" } else { "not met" }),
    })
}

fn qrseq(g: &Global, p: u64) -> Res<Outcome> {
    let s = qr_sequence(p)?.to_string();
    ok(match g.format {
        Format::Json => line(json!({ "p": p, "s": s })),
        Format::Lines => format!("{s}\n"),
        Format::Human => format!("S_{p} = {s}\n"),
    })
}

fn lqr_prime_cmd(g: &Global, n: usize, witnesses: bool) -> Res<Outcome> {
    let rec = lqr_prime(n, g.max_p)?;
    let mut text = match g.format {
        Format::Json => line(json!({ "n": n, "l_n": rec.l_n })),
        Format::Lines => format!("{n} {}\n", rec.l_n),
        Format::Human => format!("L_{n} = {}\n", rec.l_n),
    };
    if witnesses {
        for (code, a) in rec.witnesses.iter().enumerate() {
            match g.format {
                Format::Json => text += &line(json!({ "code": code, "p": rec.l_n, "a": a })),
                _ => {
                    let a: Vec<String> = a.iter().map(u64::to_string).collect();
                    writeln!(text, "{code} {}", a.join(",")).unwrap();
                }
            }
        }
    }
    ok(text)
}

fn parse_list(s: &str) -> Res<Vec<i64>> {
    s.split(',').map(|t| t.trim().parse::<i64>().map_err(|_| CliError::Usage(format!("bad integer {t:?} in {s:?}")))).collect()
}

fn parse_embedding(spec: &str, n: usize) -> Res<LinearEmbedding> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let g = match (kind, arg.is_empty()) {
        ("sym", true) => embed_symmetric(n)?,
        ("any", true) => embed_any(n)?,
        ("weighted", false) => embed_weighted(&parse_list(arg)?)?,
        ("comp", false) => match parse_list(arg)?.as_slice() {
            &[m, k] if m > 0 && k > 0 => embed_composition(m as usize, k as usize)?,
            _ => return Err(CliError::Usage(format!("comp expects M,K, got {arg:?}"))),
        },
        _ => return Err(CliError::Usage(format!("unknown embedding {spec:?}; expected sym, weighted:W, any or comp:M,K"))),
    };
    if g.arity() != n {
        return Err(CliError::Usage(format!("embedding {spec} has {} variables but the function has {n}", g.arity())));
    }
    Ok(g)
}

fn describe(g: &Global, proto: &LqrProtocol) -> String {
    match g.format {
        Format::Human => format!("{proto}  ({} bits)\n", proto.bit_cost()),
        _ => format!("{}\n", proto.to_json()),
    }
}

fn synth(g: &Global, f: &str, embed: &str) -> Res<Outcome> {
    let f = boolean_spec(f)?;
    let emb = parse_embedding(embed, f.arity())?;
    let proto = synthesize(&f, &emb, conv(g), g.max_p)?;
    ok(describe(g, &proto))
}

fn minimal(g: &Global, f: &str) -> Res<Outcome> {
    let f = boolean_spec(f)?;
    let proto = find_minimal_protocol(&f, g.max_p, conv(g))?;
    ok(describe(g, &proto))
}

enum Loaded {
    Lqr(Vec<LqrProtocol>),
    Fkn,
}

fn load_protocols(arg: &str) -> Res<Loaded> {
    if arg == "fkn" {
        return Ok(Loaded::Fkn);
    }
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|source| CliError::Io { path: arg.to_string(), source })?
    };
    let protos = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(LqrProtocol::from_json)
        .collect::<qrpsm_core::Result<Vec<_>>>()?;
    if protos.is_empty() {
        return Err(CliError::Usage(format!("no protocol descriptors in {arg}")));
    }
    Ok(Loaded::Lqr(protos))
}

fn fmt_vec(v: &[u64]) -> String {
    let s: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("[{}]", s.join(","))
}

fn u8s(x: &[u64]) -> Vec<u8> {
    x.iter().map(|&v| v as u8).collect()
}

/// Verdict for one protocol: None on PASS, otherwise the counterexample as (text, json).
type Verdict = Option<(String, Value)>;

fn fast_verdict(proto: &LqrProtocol, f: &TruthTable, c: SignConvention) -> Res<Verdict> {
    if fast_verify_lqr(proto, f, c)? {
        // Correctness of the residuosity pattern already forces equal classes on equal outputs.
        return Ok(None);
    }
    let m = proto.modulus();
    let i = (0..1usize << f.arity()).find(|&i| m.legendre(proto.value(i)) != c.sign(f.at(i))).expect("fast check failed somewhere");
    let x: Vec<u64> = index_bits(i, f.arity()).into_iter().map(u64::from).collect();
    let got = m.legendre(proto.value(i));
    let want = c.sign(f.at(i));
    Ok(Some((
        format!("x={} got={got} want={want}", fmt_vec(&x)),
        json!({ "kind": "correctness", "x": x, "got": got, "want": want }),
    )))
}

fn exhaustive_verdict<P: PsmProtocol>(proto: &P, target: impl Fn(&[u64]) -> i8 + Sync + Copy, budget: u128) -> Res<Verdict> {
    if let Some(e) = verify_correctness(proto, target, budget)? {
        return Ok(Some((
            format!("x={} r={} got={} want={}", fmt_vec(&e.inputs), fmt_vec(&e.randomness), e.got, e.want),
            json!({ "kind": "correctness", "x": e.inputs, "r": e.randomness, "got": e.got, "want": e.want }),
        )));
    }
    if let Some(e) = verify_security(proto, target, budget)? {
        return Ok(Some((
            format!("insecure x={} x'={} out={}", fmt_vec(&e.x), fmt_vec(&e.x_prime), e.output),
            json!({ "kind": "security", "x": e.x, "x_prime": e.x_prime, "out": e.output }),
        )));
    }
    Ok(None)
}

fn render_verdicts(g: &Global, rows: &[(String, Verdict)]) -> Outcome {
    let mut text = String::new();
    for (name, v) in rows {
        match (g.format, v) {
            (Format::Json, None) => text += &line(json!({ "protocol": name, "pass": true })),
            (Format::Json, Some((_, j))) => text += &line(json!({ "protocol": name, "pass": false, "counterexample": j })),
            (Format::Lines, None) => text += "PASS\n",
            (Format::Lines, Some((s, _))) => writeln!(text, "FAIL {s}").unwrap(),
            (Format::Human, None) => writeln!(text, "{name}: PASS").unwrap(),
            (Format::Human, Some((s, _))) => writeln!(text, "{name}: FAIL {s}").unwrap(),
        }
    }
    Outcome { ok: rows.iter().all(|(_, v)| v.is_none()), text }
}

fn verify(g: &Global, protocol: &str, f: &str, mode: Mode, budget: u128) -> Res<Outcome> {
    let spec = parse_spec(f)?;
    let c = conv(g);
    match load_protocols(protocol)? {
        Loaded::Fkn => {
            if spec != FunctionSpec::Comp {
                return Err(CliError::Usage("the fkn protocol computes COMP".into()));
            }
            let v = exhaustive_verdict(&fkn_comp(), |x: &[u64]| comp(x[0], x[1]), budget)?;
            Ok(render_verdicts(g, &[("fkn".to_string(), v)]))
        }
        Loaded::Lqr(protos) => {
            let t = spec.truth_table().ok_or_else(|| CliError::Usage("COMP is only available as --protocol fkn".into()))?;
            let mut rows = Vec::new();
            for proto in protos {
                let v = match mode {
                    Mode::Fast => fast_verdict(&proto, &t, c)?,
                    Mode::Exhaustive => {
                        if proto.n() != t.arity() {
                            return Err(qrpsm_core::Error::Arity { expected: t.arity(), got: proto.n() }.into());
                        }
                        let target = |x: &[u64]| c.sign(t.at(bits_index(&u8s(x))));
                        exhaustive_verdict(&build_lqr(&proto), target, budget)?
                    }
                };
                rows.push((proto.to_string(), v));
            }
            Ok(render_verdicts(g, &rows))
        }
    }
}

fn run_protocol(g: &Global, protocol: &str, x: &str, seed: Option<u64>) -> Res<Outcome> {
    let x: Vec<u64> = parse_list(x)?
        .into_iter()
        .map(|v| u64::try_from(v).map_err(|_| CliError::Usage(format!("negative input {v}"))))
        .collect::<Res<_>>()?;
    let seed = seed.unwrap_or_else(rand::random);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = match load_protocols(protocol)? {
        Loaded::Fkn => {
            let p = fkn_comp();
            execute(&p, &x, &p.randomness(rng.gen_range(0..p.randomness_size())))?
        }
        Loaded::Lqr(protos) if protos.len() == 1 => {
            let p = build_lqr(&protos[0]);
            execute(&p, &x, &p.randomness(rng.gen_range(0..p.randomness_size())))?
        }
        Loaded::Lqr(_) => return Err(CliError::Usage("run takes a single protocol".into())),
    };
    ok(match g.format {
        Format::Json => line(json!({ "seed": seed, "x": t.inputs, "r": t.randomness, "m": t.messages, "out": t.output })),
        _ => format!("seed={seed} {t}\n"),
    })
}

fn dre_verdict(v: Option<DreFailure>) -> Verdict {
    v.map(|f| match f {
        DreFailure::Correctness { x, r, got, want } => (
            format!("x={} r={} got={got} want={want}", fmt_vec(&x), fmt_vec(&r)),
            json!({ "kind": "correctness", "x": x, "r": r, "got": got, "want": want }),
        ),
        DreFailure::Security { x, x_prime, value } => (
            format!("insecure x={} x'={} value={value}", fmt_vec(&x), fmt_vec(&x_prime)),
            json!({ "kind": "security", "x": x, "x_prime": x_prime, "value": value }),
        ),
    })
}

fn dre_check(g: &Global, poly: Option<&str>, k: Option<usize>, p: u64, budget: u128) -> Res<Outcome> {
    let (f, dre) = match (poly, k) {
        (Some(s), _) => {
            let f: Polynomial = s.parse()?;
            let dre = dre_polynomial(&f, p)?;
            (f, dre)
        }
        (None, Some(k)) => (product_plus(k), dre_product_plus(k, p)?),
        (None, None) => return Err(CliError::Usage("pass --poly or --product-plus".into())),
    };
    let m = dre.modulus();
    let v = verify_dre(&dre, |x: &[u64]| f.eval_mod(x, m), budget)?;
    let v = dre_verdict(v);
    let (len, rand) = (dre.output_length(), dre.randomness_size());
    let text = match (g.format, &v) {
        (Format::Json, None) => line(json!({ "poly": f.to_string(), "p": p, "pass": true, "len": len, "rand": rand.to_string() })),
        (Format::Json, Some((_, j))) => line(json!({ "poly": f.to_string(), "p": p, "pass": false, "counterexample": j })),
        (Format::Lines, None) => format!("PASS len={len} rand={rand}\n"),
        (Format::Lines, Some((s, _))) => format!("FAIL {s}\n"),
        (Format::Human, None) => format!("{f} mod {p}: PASS  (output length {len}, {rand} randomness values)\n"),
        (Format::Human, Some((s, _))) => format!("{f} mod {p}: FAIL {s}\n"),
    };
    Ok(Outcome { ok: v.is_none(), text })
}

fn compile_dre(g: &Global, f: &str, poly: &str, no_verify: bool, dump: bool, budget: u128) -> Res<Outcome> {
    let t = boolean_spec(f)?;
    let emb: Polynomial = poly.parse()?;
    let c = conv(g);
    let q = compile(&t, &emb, c, g.max_p)?;
    let cost = q.estimate_cost();
    let mut text = match g.format {
        Format::Human => format!(
            "p = {}  a0 = {}  g = {}  DRE length {}  ({} bits)\n",
            q.p(),
            q.a0(),
            q.embedding(),
            cost.s,
            cost.bits
        ),
        _ => line(serde_json::from_str(&q.descriptor_json(dump)).expect("descriptor is JSON")),
    };
    if no_verify {
        return ok(text);
    }
    let target = |x: &[u64]| c.sign(t.at(bits_index(&u8s(x))));
    let v = exhaustive_verdict(&q, target, budget)?;
    let out = render_verdicts(g, &[(format!("compiled mod {}", q.p()), v)]);
    text += &out.text;
    Ok(Outcome { text, ok: out.ok })
}

fn paley(g: &Global, p: u64, n: usize, full: bool, edges: bool) -> Res<Outcome> {
    if edges {
        return ok(PaleyStructure::new(p)?.edge_list());
    }
    let report = if full {
        has_star_property_full(p, n)?
    } else {
        let holds = has_star_property_reduced(p, n)?;
        qrpsm_core::StarPropertyReport { p, n, kind: PaleyStructure::new(p)?.kind(), holds, witness_failure: None }
    };
    let text = match g.format {
        Format::Json => line(serde_json::to_value(&report).expect("report serializes")),
        Format::Lines => format!("{p} {n} {}\n", report.holds),
        Format::Human => format!("{report}\n"),
    };
    Ok(Outcome { ok: report.holds, text })
}

fn paley_m(g: &Global, n: usize) -> Res<Outcome> {
    let v = m_values(n, g.max_p)?;
    ok(match g.format {
        Format::Json => line(serde_json::to_value(v).expect("values serialize")),
        Format::Lines => format!("{} {} {} {}\n", v.n, v.m_g, v.m_t, v.m),
        Format::Human => format!("n = {}: m_G = {}, m_T = {}, m = {}\n", v.n, v.m_g, v.m_t, v.m),
    })
}

struct TableReport {
    text: String,
    rows: Vec<Value>,
    mismatches: usize,
}

impl TableReport {
    fn section(&mut self, name: &str) {
        writeln!(self.text, "# {name}").unwrap();
    }

    fn row(&mut self, section: &str, key: String, got: String, want: String) {
        let same = got == want;
        if same {
            writeln!(self.text, "{key} {got} ok").unwrap();
        } else {
            self.mismatches += 1;
            writeln!(self.text, "{key} {got} MISMATCH expected {want}").unwrap();
        }
        self.rows.push(json!({ "table": section, "key": key, "got": got, "expected": want, "ok": same }));
    }
}

/// Regenerates everything from scratch; output depends only on the arguments.
pub fn tables(lqr_max_n: usize, exhaustive_max_n: usize, format: Format) -> Res<Outcome> {
    let mut r = TableReport { text: String::new(), rows: Vec::new(), mismatches: 0 };
    r.section("qr-sequences");
    for (p, s) in QR_SEQUENCES {
        r.row("qr-sequences", p.to_string(), qr_sequence(p)?.to_string(), s.to_string());
    }
    r.section("peralta-primes");
    for (n, want) in PERALTA_PRIMES {
        r.row("peralta-primes", n.to_string(), peralta_prime(n, want.max(1 << 16))?.p.to_string(), want.to_string());
    }
    r.section("lqr-primes");
    for (n, want) in LQR_PRIMES.into_iter().filter(|(n, _)| *n <= lqr_max_n) {
        r.row("lqr-primes", n.to_string(), lqr_prime(n, 1 << 12)?.l_n.to_string(), want.to_string());
    }
    r.section("protocol-list");
    for e in PROTOCOL_LIST {
        let t = e.spec().truth_table().expect("golden specs are Boolean");
        let proto = e.protocol()?;
        let fast = fast_verdict(&proto, &t, SignConvention::Table)?.is_none();
        let mut got = format!("fast={}", if fast { "PASS" } else { "FAIL" });
        let mut want = "fast=PASS".to_string();
        if e.n <= exhaustive_max_n {
            let target = |x: &[u64]| SignConvention::Table.sign(t.at(bits_index(&u8s(x))));
            let pass = exhaustive_verdict(&build_lqr(&proto), target, qrpsm_core::psm::DEFAULT_BUDGET)?.is_none();
            got += if pass { ",exhaustive=PASS" } else { ",exhaustive=FAIL" };
            want += ",exhaustive=PASS";
        }
        r.row("protocol-list", format!("{}:{} {proto} {}", e.column, e.n, e.function), got, want);
    }
    writeln!(r.text, "# mismatches {}", r.mismatches).unwrap();
    let text = match format {
        Format::Json => r.rows.iter().map(|v| line(v.clone())).collect(),
        _ => r.text,
    };
    Ok(Outcome { ok: r.mismatches == 0, text })
}
