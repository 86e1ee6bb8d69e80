//! One PASS/FAIL line per acceptance criterion. Every expected value here is
//! produced by an oracle written in this file, not by the library.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ilrs::certify::{CheckStatus, SymbolicConstant};
use ilrs::modular::DEFAULT_STATE_CAP;
use ilrs::scalar::Real;
use ilrs::{
    certify_divisibility, certify_pisot_floor, certify_prime_free_interval, delta_estimate,
    eval_chain_mod, find_period, floor_alpha_pow, theta, trace_ilrs, verify_certificate, BigFloat,
    Budget, Certificate, CompositionChain, Context, Error, IlrsSpec, MinPoly, Rational,
    VerificationReport,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn primes_upto(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

/// `(F(k), F(k+1)) mod q` by fast doubling, `F(0) = 0`.
fn fib_pair_mod(k: &BigUint, q: u64) -> (u64, u64) {
    let q = q as u128;
    let (mut a, mut b) = (0u128, 1u128);
    for i in (0..k.bits()).rev() {
        let c = a * ((2 * b + q - a) % q) % q;
        let d = (a * a + b * b) % q;
        (a, b) = if k.bit(i) { (d, (c + d) % q) } else { (c, d) };
    }
    (a as u64, b as u64)
}

/// Exact Lucas numbers `(L(k), L(k+1))`, `L(0) = 2`, by fast doubling.
fn lucas_pair(k: u64) -> (BigInt, BigInt) {
    if k == 0 {
        return (BigInt::from(2), BigInt::one());
    }
    let (a, b) = lucas_pair(k / 2);
    let j = k / 2;
    let sign = |e: u64| if e.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    let even = &a * &a - 2 * sign(j);
    let odd = &a * &b - sign(j);
    if k.is_multiple_of(2) {
        (even, odd)
    } else {
        let next = &b * &b - 2 * sign(j + 1);
        (odd, next)
    }
}

fn fib_exact(n: u64) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..n {
        let t = &a + &b;
        a = b;
        b = t;
    }
    a
}

fn failures(r: &VerificationReport) -> String {
    r.failures()
        .map(|c| format!("{} n={:?} h={:?}: {}", c.claim, c.n, c.h, c.detail))
        .collect::<Vec<_>>()
        .join("; ")
}

fn c1_period_bounds() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(20_240_601);
    let mut reversible = 0;
    for _ in 0..200 {
        let d = rng.gen_range(1..=3usize);
        let mut coeffs: Vec<i64> = (0..d).map(|_| rng.gen_range(-5..=5)).collect();
        while coeffs[0] == 0 {
            coeffs[0] = rng.gen_range(-5..=5);
        }
        let initial: Vec<i64> = (0..d).map(|_| rng.gen_range(-5..=5)).collect();
        let spec = IlrsSpec::new(&coeffs, rng.gen_range(-5..=5), &initial).map_err(|e| e.to_string())?;
        let q = rng.gen_range(2..=20u64);
        let info = find_period(&spec, q, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
        let bound = q.pow(d as u32);
        ensure(info.s <= bound && info.period <= bound, || {
            format!("{coeffs:?} mod {q}: s={} L={} > q^d={bound}", info.s, info.period)
        })?;
        if spec.is_reversible() {
            reversible += 1;
            ensure(info.s == 1, || format!("reversible {coeffs:?} mod {q} has s={}", info.s))?;
        }
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("200 sequences, {reversible} reversible, {:?}", start.elapsed()))
}

fn c2_pisano() -> Outcome {
    let f = IlrsSpec::fibonacci();
    let mut seen = Vec::new();
    for q in [2u64, 3, 5, 7, 10] {
        // Direct scan for the first return of (F(n), F(n+1)) = (1, 1) mod q.
        let (mut a, mut b, mut n) = (1 % q, 1 % q, 1u64);
        loop {
            (a, b) = (b, (a + b) % q);
            n += 1;
            if (a, b) == (1 % q, 1 % q) {
                break;
            }
        }
        let oracle = n - 1;
        let info = find_period(&f, q, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
        ensure(info.period == oracle && info.s == 1, || {
            format!("q={q}: got s={} L={}, oracle L={oracle}", info.s, info.period)
        })?;
        seen.push(format!("{q}:{oracle}"));
    }
    Ok(seen.join(" "))
}

fn c3_tower_oracle() -> Outcome {
    let ctx = Context::default();
    let f = IlrsSpec::fibonacci();
    let chains = [
        vec![f.clone()],
        vec![f.clone(), f.clone()],
        vec![IlrsSpec::lucas(), f.clone()],
        vec![IlrsSpec::doubling(), f.clone()],
    ];
    let budget = Budget::default();
    let mut compared = 0;
    for levels in chains {
        let chain = CompositionChain::new(levels).map_err(|e| e.to_string())?;
        for n in 1..=25u64 {
            let exact = match chain.eval_exact_u64(n, &budget) {
                Ok(v) => v,
                Err(Error::BudgetExceeded(_)) => continue,
                Err(e) => return Err(e.to_string()),
            };
            for q in primes_upto(50) {
                let want = exact.mod_floor(&BigInt::from(q)).to_u64().unwrap();
                let got = eval_chain_mod(&chain, &BigUint::from(n), q, None, &ctx).map_err(|e| e.to_string())?;
                ensure(got == want, || format!("{} n={n} q={q}: {got} != {want}", chain.describe()))?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} comparisons, 0 mismatches"))
}

fn c4_divisibility() -> Outcome {
    let start = Instant::now();
    let ctx = Context::default();
    let chain = CompositionChain::single(IlrsSpec::fibonacci());
    let c = certify_divisibility(&chain, 0, 12, &ctx).map_err(|e| e.to_string())?;
    ensure(c.prime_for(0) == Some(2), || format!("p_0 = {:?}", c.prime_for(0)))?;
    ensure(c.period.is_multiple_of(&BigUint::from(3u32)), || format!("L = {}", c.period))?;
    let l = c.period.to_u64().unwrap();
    // Independent parity check of F(12), F(12 + L), ... for n = 0..=5.
    for n in 0..=5 {
        ensure(fib_exact(12 + l * n).is_even(), || format!("F({}) is odd", 12 + l * n))?;
    }
    let r = verify_certificate(&Certificate::Divisibility(c), 5, &ctx);
    ensure(r.passed(), || failures(&r))?;
    ensure(r.count(CheckStatus::Skipped) == 0, || "checks were skipped".into())?;
    within(Duration::from_secs(5), start)?;
    Ok(format!("p0=2 L={l}, {} checks passed, {:?}", r.count(CheckStatus::Pass), start.elapsed()))
}

fn c5_interval() -> Outcome {
    let ctx = Context::default();
    let f = IlrsSpec::fibonacci();
    let chain = CompositionChain::new(vec![f.clone(), f]).map_err(|e| e.to_string())?;
    let c = certify_prime_free_interval(&chain, 5, &ctx).map_err(|e| e.to_string())?;
    ensure(c.h_max() == 3, || format!("H = {}", c.h_max()))?;
    ensure(c.primes == [2, 3, 5, 7], || format!("P = {:?}", c.primes))?;
    let mut found = c.divisibility.distinct_primes();
    found.sort_unstable();
    ensure(found == primes_upto(2 * c.h_max() + 2), || format!("{{p_h}} = {found:?}"))?;

    // Test-side path: F(N) exactly, then F(F(N)) mod p by fast doubling.
    for n in 0..2u64 {
        let big_n = c.divisibility.period.to_u64().unwrap() * n + 5;
        let inner = fib_exact(big_n).to_biguint().unwrap();
        for h in -3i64..=3 {
            let hit = c.primes.iter().find(|&&p| {
                let (r, _) = fib_pair_mod(&inner, p);
                (r as i64 + h).rem_euclid(p as i64) == 0
            });
            ensure(hit.is_some(), || format!("n={n} h={h}: no prime of P divides"))?;
        }
    }
    let r = verify_certificate(&Certificate::PrimeFreeInterval(c), 2, &ctx);
    ensure(r.passed(), || failures(&r))?;
    ensure(r.count(CheckStatus::Skipped) == 0, || "checks were skipped".into())?;
    Ok(format!("H=3 P={{2,3,5,7}}, {} checks passed", r.count(CheckStatus::Pass)))
}

fn c6_constants() -> Outcome {
    let e = delta_estimate(&BigUint::from(10u32).pow(6), 8, 1e-4).map_err(|e| e.to_string())?;
    ensure(e.c_display() == "0.0624", || format!("c = {}", e.c_display()))?;
    ensure((e.c - 0.0624).abs() < 5e-5, || format!("c = {}", e.c))?;
    let s = SymbolicConstant::for_known_orders(4, "d");
    ensure(s.to_string() == "1/(8d) - ε", || s.to_string())?;
    for d in [2u64, 3, 4] {
        let e = delta_estimate(&BigUint::from(100u32), 4 * d, 1e-4).map_err(|e| e.to_string())?;
        ensure(e.c_fraction == Rational::new(1, 8 * d as i64), || format!("d={d}: {}", e.c_fraction))?;
    }
    Ok(format!("c = {}, symbolic {s}", e.c_display()))
}

fn c7_pisot_floor() -> Outcome {
    let ctx = Context::default();
    let inner = CompositionChain::single(IlrsSpec::fibonacci());
    let golden = MinPoly::golden();
    let c = certify_pisot_floor(&golden, &inner, 0, 4, &ctx).map_err(|e| e.to_string())?;
    ensure(c.offset.bound == 1, || format!("G = {}", c.offset.bound))?;
    let l = c.divisibility.period.to_u64().unwrap();
    for n in 0..2u64 {
        let big_n = fib_exact(l * n + 4).to_u64().unwrap();
        let fp = floor_alpha_pow(&golden, big_n, 256, &ctx.config.budget).map_err(|e| e.to_string())?;
        // phi^N + psi^N = Lucas(N) with 0 < |psi^N| < 1.
        let lucas = lucas_pair(big_n).0;
        let floor = if big_n.is_multiple_of(2) { &lucas - 1 } else { lucas.clone() };
        ensure(fp.floor == floor && fp.trace == lucas, || format!("N={big_n}: floor mismatch"))?;
        ensure(fp.floor == &fp.trace + &fp.g && fp.g.abs() <= BigInt::one(), || format!("g = {}", fp.g))?;
        let p = c.divisibility.prime_for(fp.g.to_i64().unwrap()).ok_or("no prime for g")?;
        ensure((&floor % p).is_zero() && floor > BigInt::from(p), || {
            format!("N={big_n}: {p} does not certify compositeness")
        })?;
    }
    let r = verify_certificate(&Certificate::PisotFloor(c), 2, &ctx);
    ensure(r.passed(), || failures(&r))?;
    ensure(r.count(CheckStatus::Skipped) == 0, || "checks were skipped".into())?;
    Ok(format!("G=1 L={l}, {} checks passed", r.count(CheckStatus::Pass)))
}

fn c8_trace() -> Outcome {
    let t = trace_ilrs(&MinPoly::golden());
    let prec = 256;
    let s5 = BigFloat::from_int(&BigInt::from(5), prec).sqrt();
    let half = BigFloat::pow2(-1);
    let phi = (BigFloat::one() + s5.clone()) * half.clone();
    let psi = (BigFloat::one() - s5) * half;
    let tol = BigFloat::pow2(-128);
    let (mut a, mut b) = (phi.clone(), psi.clone());
    let values = (1..=30)
        .map(|n| t.eval_exact(n, &Budget::default()))
        .collect::<ilrs::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    for (i, v) in values.iter().enumerate() {
        let n = i as u64 + 1;
        ensure(*v == lucas_pair(n).0, || format!("trace({n}) = {v}"))?;
        let numeric = a.clone() + b.clone();
        let diff = (numeric - BigFloat::from_int(v, prec)).abs();
        ensure(diff < tol, || format!("n={n}: numeric power sum off by {}", diff.to_f64_lossy()))?;
        a = a * phi.clone();
        b = b * psi.clone();
    }
    Ok("Lucas L(1..=30), numeric error < 2^-128".into())
}

fn c9_theta() -> Outcome {
    let start = Instant::now();
    let direct: f64 = [2.0f64, 3.0, 5.0, 7.0].iter().map(|p| p.ln()).sum();
    let t10 = theta(10.0).map_err(|e| e.to_string())?;
    ensure((t10 - direct).abs() < 1e-3 && (t10 - 5.3471).abs() < 1e-3, || format!("theta(10) = {t10}"))?;
    let mut ratios = Vec::new();
    for x in [1e3, 1e4, 1e5] {
        let r = theta(x).map_err(|e| e.to_string())? / x;
        ensure(r > 0.8 && r < 1.2, || format!("theta({x})/{x} = {r}"))?;
        ratios.push(format!("{r:.4}"));
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("theta(10) = {t10:.4}, ratios {}", ratios.join(" ")))
}

fn c10_negative() -> Outcome {
    let ctx = Context::default();
    let chain = CompositionChain::single(IlrsSpec::fibonacci());
    let good = certify_divisibility(&chain, 0, 12, &ctx).map_err(|e| e.to_string())?;
    let mut named = Vec::new();

    let mut wrong_prime = good.clone();
    wrong_prime.entries[0].prime = 3;
    let mut wrong_l = good.clone();
    wrong_l.period = BigUint::from(4u32);
    let mut wrong_m = good.clone();
    wrong_m.m = 13;
    for (what, cert) in [("prime", wrong_prime), ("L", wrong_l), ("m", wrong_m)] {
        let r = verify_certificate(&Certificate::Divisibility(cert), 5, &ctx);
        let first = r.failures().next().ok_or_else(|| format!("wrong {what} passed verification"))?;
        ensure(!first.claim.is_empty(), || "unnamed failure".into())?;
        named.push(format!("{what}: '{}'", first.claim));
    }
    let bad = CompositionChain::new(vec![IlrsSpec::fibonacci(), IlrsSpec::doubling()]);
    ensure(matches!(bad, Err(Error::NotReversible { .. })), || format!("{bad:?}"))?;
    Ok(format!("{}; non-reversible inner level rejected", named.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("period bounds on 200 random sequences", c1_period_bounds),
        ("Pisano periods against a residue scan", c2_pisano),
        ("tower evaluation equals exact evaluation", c3_tower_oracle),
        ("divisibility certificate for [F], H=0, m=12", c4_divisibility),
        ("prime-free interval certificate for [F,F], m=5", c5_interval),
        ("delta constants", c6_constants),
        ("floor(phi^F(N)) composite", c7_pisot_floor),
        ("trace sequence of X^2 - X - 1", c8_trace),
        ("theta sanity", c9_theta),
        ("negative controls", c10_negative),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({why})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
