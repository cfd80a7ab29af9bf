//! Acceptance suite: one PASS/FAIL line per criterion, each evaluated at its
//! stated size and tolerance.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use easyq::category::{category_equal, closure, CategoryExpr};
use easyq::enumerate::numbers::{bell, catalan, motzkin};
use easyq::enumerate::{count, enumerate, for_each_member, CategoryId};
use easyq::identities::{table, Identity};
use easyq::models::{
    bar_residual, check, conjugate_by_c, orthogonality_residual, quotient_projections,
    sample_classical, selfadjoint_residual, unconjugate_by_c, witness_search, BlockMatrixModel,
    ClassicalGroup, RelationPreset,
};
use easyq::moments::{
    cumulants_from_moments, dilate, finite_group_moment, free_convolve, free_poisson,
    moments_from_cumulants, ncjoin_count, FiniteGroup, MomentSeries,
};
use easyq::partition::{BulletedPartition, Color, Diagram, Partition};
use easyq::tensor_rep::{
    f_matrix, fix_dim, gram_rank, is_intertwiner, is_intertwiner_dense,
    t_matrix, xi_vector, IndexSpace, IntertwinerMatrix, TImpl, TMatrixCache,
};

const TOL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
    /// Failure confined to sub-checks documented as unattainable.
    known_failure: bool,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
        known_failure: false,
    }
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    let tally = |cat: &CategoryId, k: usize| {
        let mut n: u64 = 0;
        for_each_member(cat, 0, k, &mut |_| n += 1);
        BigUint::from(n)
    };
    for k in 0..=10usize {
        let ku = k as u64;
        if tally(&CategoryId::NC, k) != catalan(ku) {
            bad.push(format!("NC({k})"));
        }
        if tally(&CategoryId::P, k) != bell(ku) {
            bad.push(format!("P({k})"));
        }
        let nc2 = if k % 2 == 0 { catalan(ku / 2) } else { BigUint::from(0u32) };
        if tally(&CategoryId::NC2, k) != nc2 {
            bad.push(format!("NC2({k})"));
        }
        if tally(&CategoryId::NC12, k) != motzkin(ku) {
            bad.push(format!("NC12({k})"));
        }
    }
    let t = start.elapsed();
    verdict(
        bad.is_empty() && within(t, 5),
        format!("k=0..10, mismatches {bad:?}, {:.2}s (limit 5s)", t.as_secs_f64()),
    )
}

fn identity_verdict(identity: Identity, upto: usize, secs: Option<u64>, head: &[(usize, u64)]) -> Verdict {
    let start = Instant::now();
    let t = match table(identity, upto, 4) {
        Ok(t) => t,
        Err(e) => return verdict(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    let heads_ok = head.iter().all(|&(k, v)| {
        t.rows
            .iter()
            .find(|r| r.k == k)
            .is_some_and(|r| r.lhs == BigUint::from(v))
    });
    let values: Vec<String> = t.rows.iter().map(|r| r.lhs.to_string()).collect();
    let time_ok = secs.map_or(true, |s| within(elapsed, s));
    verdict(
        t.all_pass() && heads_ok && time_ok,
        format!("{identity} k≤{upto}: [{}], {:.2}s", values.join(", "), elapsed.as_secs_f64()),
    )
}

fn criterion_5() -> Verdict {
    let t = match table(Identity::BesselCount, 5, 4) {
        Ok(t) => t,
        Err(e) => return verdict(false, e.to_string()),
    };
    let values: Vec<String> = t.rows.iter().map(|r| r.lhs.to_string()).collect();
    let printed: Vec<String> = t
        .rows
        .iter()
        .map(|r| r.extra.as_ref().map(ToString::to_string).unwrap_or_default())
        .collect();
    let heads = t.rows[0].lhs == BigUint::from(2u32) && t.rows[1].lhs == BigUint::from(16u32);
    verdict(
        t.all_pass() && heads,
        format!(
            "per-block [{}]; block-count form Σ2^(k-ν) [{}] diverges at k={:?}",
            values.join(", "),
            printed.join(", "),
            t.extra_divergences()
        ),
    )
}

fn functoriality(cat: &CategoryId, space: &IndexSpace) -> (usize, usize) {
    let mut cache = TMatrixCache::new(*space, TImpl::for_kind(cat.kind()));
    let (mut checked, mut failed) = (0, 0);
    for total in 0..=6usize {
        for k in 0..=total {
            for m in 0..=total - k {
                let l = total - k - m;
                let uppers = enumerate(cat, k, m).unwrap();
                let lowers = enumerate(cat, m, l).unwrap();
                for s in &uppers {
                    for p in &lowers {
                        checked += 1;
                        if !cache.composition_holds(s, p).unwrap() {
                            failed += 1;
                        }
                    }
                }
            }
        }
    }
    (checked, failed)
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let cats = [
        CategoryId::NC,
        CategoryId::NCbullet,
        CategoryId::NCeven,
        CategoryId::NCbulletEven,
    ];
    let spaces = [(1, 0), (1, 1), (2, 1)];
    let mut lines = Vec::new();
    let mut failing = Vec::new();
    for cat in &cats {
        for &(p, q) in &spaces {
            let space = IndexSpace::new(p, q).unwrap();
            let (checked, failed) = functoriality(cat, &space);
            let ok = failed == 0;
            if !ok {
                failing.push(format!("{cat}@({p},{q})"));
            }
            lines.push(format!(
                "    {} {cat} (p,q)=({p},{q}): {failed} of {checked} pairs fail",
                if ok { "PASS" } else { "FAIL" }
            ));
        }
    }
    let mut cup_cap_ok = true;
    for p in 0..=3usize {
        for q in 0..=6usize {
            let n = 2 * p + q;
            if n == 0 || n > 6 {
                continue;
            }
            let space = IndexSpace::new(p, q).unwrap();
            let cap = t_matrix(&Partition::cap().into(), &space, &TImpl::Plain).unwrap();
            let cup = t_matrix(&Partition::cup().into(), &space, &TImpl::Plain).unwrap();
            let product = cup.mul(&cap).unwrap();
            cup_cap_ok &= product == IntertwinerMatrix::identity(1).scale(n as i64);
        }
    }
    lines.push(format!(
        "    {} T_cup·T_cap = (2p+q)·id for 2p+q ≤ 6",
        if cup_cap_ok { "PASS" } else { "FAIL" }
    ));
    let t = start.elapsed();
    let pass = failing.is_empty() && cup_cap_ok && within(t, 60);
    // plain NC is not functorial once p > 0: an odd block meeting barred indices
    let only_plain_nc = failing.iter().all(|f| f.starts_with("NC@")) && !failing.is_empty();
    Verdict {
        pass,
        detail: format!(
            "failing {failing:?}, {:.2}s (limit 60s)\n{}",
            t.as_secs_f64(),
            lines.join("\n")
        ),
        known_failure: !pass && only_plain_nc && cup_cap_ok && within(t, 60),
    }
}

fn bulleted(k: usize, l: usize, blocks: &[&[usize]], colors: &[Color]) -> Diagram {
    let base = Partition::new(k, l, blocks.iter().map(|b| b.to_vec()).collect()).unwrap();
    Diagram::Bulleted(BulletedPartition::new(base, colors.to_vec()).unwrap())
}

fn closure_matches(gens: &[Diagram], cat: &CategoryId, max: usize) -> Result<(), String> {
    let set = closure(gens, max).map_err(|e| e.to_string())?;
    for n in 0..=max {
        for k in 0..=n {
            let mut got = set.shape(k, n - k);
            got.sort();
            if got != enumerate(cat, k, n - k).unwrap() {
                return Err(format!("{cat} differs at ({k},{})", n - k));
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Verdict {
    use Color::{Black, White};
    let start = Instant::now();
    let mut problems = Vec::new();
    let nc2: CategoryExpr = "nc2".parse().unwrap();
    let meet: CategoryExpr = "nc12&nceven".parse().unwrap();
    match category_equal(&nc2, &meet, 8) {
        Ok(None) => {}
        Ok(Some(c)) => problems.push(format!("NC2 ≠ NC12∩NCeven at {}", c.diagram())),
        Err(e) => problems.push(e.to_string()),
    }
    let pi1 = bulleted(0, 2, &[&[1, 2]], &[Black, White]);
    let fork = bulleted(1, 2, &[&[1, 2, 3]], &[Black, Black, White]);
    let four = bulleted(1, 3, &[&[1, 2, 3, 4]], &[Black, White, Black, White]);
    if let Err(e) = closure_matches(&[pi1.clone(), fork], &CategoryId::NCbullet, 6) {
        problems.push(e);
    }
    if let Err(e) = closure_matches(&[pi1, four], &CategoryId::NCbulletEven, 6) {
        problems.push(e);
    }
    let t = start.elapsed();
    verdict(
        problems.is_empty() && within(t, 60),
        format!("{problems:?}, {:.2}s (limit 60s)", t.as_secs_f64()),
    )
}

fn criterion_8() -> Verdict {
    let mut problems = Vec::new();
    for n in 2..=6usize {
        for p in 0..=n / 2 {
            let space = IndexSpace::new(p, n - 2 * p).unwrap();
            let pairings = enumerate(&CategoryId::NC2, 0, 4).unwrap();
            let rank = gram_rank(&pairings, &space, &TImpl::Plain).unwrap();
            if rank != 2 {
                problems.push(format!("gram rank {rank} at (p,q)=({p},{})", n - 2 * p));
            }
            let fix = fix_dim(&CategoryId::NC2, 2, &space, &TImpl::Plain).unwrap();
            if fix != 1 {
                problems.push(format!("fix_dim {fix} at (p,q)=({p},{})", n - 2 * p));
            }
        }
    }
    let space = IndexSpace::new(2, 1).unwrap();
    let general = TImpl::GeneralF(f_matrix(&space));
    let mut compared = 0;
    for total in (0..=6).step_by(2) {
        for k in 0..=total {
            for d in enumerate(&CategoryId::P2, k, total - k).unwrap() {
                compared += 1;
                if t_matrix(&d, &space, &general).unwrap() != t_matrix(&d, &space, &TImpl::Plain).unwrap() {
                    problems.push(format!("generalF differs on {d}"));
                }
            }
        }
    }
    verdict(
        problems.is_empty(),
        format!("n=2..6 all (p,q); {compared} pairings compared; {problems:?}"),
    )
}

/// Spaces the samplers are exercised on, cycled by seed.
fn sample_space(group: ClassicalGroup, seed: u64) -> (usize, usize) {
    const PAIRED: [(usize, usize); 6] = [(1, 0), (1, 1), (2, 1), (1, 2), (2, 0), (2, 2)];
    if group.q_only() {
        (0, 3 + (seed % 3) as usize)
    } else {
        PAIRED[(seed % PAIRED.len() as u64) as usize]
    }
}

fn ones(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_element(n, 1, Complex64::new(1.0, 0.0))
}

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let mut problems: Vec<String> = Vec::new();
    let mut worst: f64 = 0.0;
    let phase = Complex64::from_polar(1.0, 0.3);
    for group in ClassicalGroup::ALL {
        for seed in 0..100u64 {
            let (p, q) = sample_space(group, seed);
            let space = IndexSpace::new(p, q).unwrap();
            let u = sample_classical(group, p, q, seed).unwrap();
            for &preset in group.presets() {
                let r = check(&u, preset, p, q, TOL).unwrap();
                worst = worst.max(r.max_residual());
                if !r.pass {
                    problems.push(format!("{group} seed {seed} fails {preset}"));
                }
            }
            // bar relations ⇔ selfadjoint entries after conjugation, both ways
            let v = conjugate_by_c(&u, p, q).unwrap();
            let forward = (bar_residual(&u, &space) <= TOL) == (selfadjoint_residual(&v) <= TOL);
            let back = unconjugate_by_c(&v, p, q).unwrap();
            let backward = bar_residual(&back, &space) <= TOL;
            let twisted = BlockMatrixModel::scalar(&(u.to_big() * phase));
            let tv = conjugate_by_c(&twisted, p, q).unwrap();
            let negative = bar_residual(&twisted, &space) > TOL && selfadjoint_residual(&tv) > TOL;
            if !(forward && backward && negative && selfadjoint_residual(&v) <= TOL) {
                problems.push(format!("{group} seed {seed}: conjugation equivalence"));
            }
            let xi = is_intertwiner(&xi_vector(&space), &u, 0, 2, TOL).unwrap();
            if !xi.holds {
                problems.push(format!("{group} seed {seed}: ξ residual {:.1e}", xi.residual));
            }
            if group == ClassicalGroup::B {
                let eta = is_intertwiner_dense(&ones(space.n()), &u, 0, 1, TOL).unwrap();
                if !eta.holds {
                    problems.push(format!("b seed {seed}: η residual {:.1e}", eta.residual));
                }
            }
        }
    }
    let t = start.elapsed();
    problems.truncate(8);
    verdict(
        problems.is_empty() && within(t, 30),
        format!(
            "7 groups × 100 seeds, max residual {worst:.1e}, {:.2}s (limit 30s) {problems:?}",
            t.as_secs_f64()
        ),
    )
}

fn criterion_10() -> Verdict {
    let mut problems: Vec<String> = Vec::new();
    let mut hpq_models = 0;
    let mut intersect_models = 0;
    for group in ClassicalGroup::ALL {
        for seed in 0..100u64 {
            let (p, q) = sample_space(group, seed);
            let u = sample_classical(group, p, q, seed).unwrap();
            if !check(&u, RelationPreset::Hpq, p, q, TOL).unwrap().pass {
                continue;
            }
            hpq_models += 1;
            let orth = orthogonality_residual(&u);
            if orth > TOL {
                problems.push(format!("{group} seed {seed}: orthogonality {orth:.1e}"));
            }
            let row_sums = check(&u, RelationPreset::Bpq, p, q, TOL).unwrap();
            if row_sums.residual("rowSums").unwrap() <= TOL {
                intersect_models += 1;
                if !check(&u, RelationPreset::Spq, p, q, TOL).unwrap().pass {
                    problems.push(format!("{group} seed {seed}: row sums 1 but not projections"));
                }
            }
            match quotient_projections(&u, p, q, TOL) {
                Ok(pm) => {
                    if !check(&pm, RelationPreset::Magic, 0, 0, TOL).unwrap().pass {
                        problems.push(format!("{group} seed {seed}: quotient not magic"));
                    }
                }
                Err(e) => problems.push(format!("{group} seed {seed}: {e}")),
            }
        }
    }
    let mut witness_found = false;
    for seed in 0..5 {
        witness_found |= witness_search(1, 1, 1, 2000, seed).unwrap().is_some();
    }
    if witness_found {
        problems.push("d=1 witness search returned a model".into());
    }
    problems.truncate(8);
    verdict(
        problems.is_empty() && hpq_models > 0 && intersect_models > 0,
        format!(
            "{hpq_models} hpq models, {intersect_models} with unit row sums, d=1 witness search None over 5 seeds; {problems:?}"
        ),
    )
}

fn criterion_11() -> Verdict {
    let mut values = Vec::new();
    let mut ok = true;
    for k in 0..=6usize {
        let v = ncjoin_count(0, k).unwrap();
        ok &= v == catalan(k as u64);
        values.push(v.to_string());
    }
    verdict(ok, format!("ncjoin(0,k) for k=0..6: [{}]", values.join(", ")))
}

fn random_series(rng: &mut ChaCha8Rng, len: usize) -> MomentSeries {
    let values = (0..len)
        .map(|_| BigRational::new(rng.gen_range(-50i64..=50).into(), rng.gen_range(1i64..=12).into()))
        .collect();
    MomentSeries::new(values).unwrap()
}

fn criterion_12() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let round_trips = (0..20).all(|_| {
        let m = random_series(&mut rng, 10);
        let kappa = cumulants_from_moments(&m, 10).unwrap();
        moments_from_cumulants(&kappa, 10).unwrap() == m
    });
    let half = BigRational::new(1.into(), 2.into());
    let nu = free_poisson(&half, 10).unwrap();
    let sum8 = free_convolve(&free_poisson(&half, 8).unwrap(), &free_poisson(&half, 8).unwrap(), 8).unwrap();
    let poisson = sum8 == free_poisson(&BigRational::one(), 8).unwrap();
    let two = BigRational::from_integer(2.into());
    let scaled = cumulants_from_moments(&dilate(&nu, &two, 10).unwrap(), 10).unwrap();
    let doubled = cumulants_from_moments(&free_convolve(&nu, &nu, 10).unwrap(), 10).unwrap();
    let dilation = (1..=10usize).all(|k| *scaled.get(k) == doubled.get(k) * Pow::pow(&two, k - 1));
    verdict(
        round_trips && poisson && dilation,
        format!("round trip K=10 ×20: {round_trips}; FP(1/2)⊞FP(1/2)=FP(1) K=8: {poisson}; κ_k(2X)=2^(k-1)κ_k(X⊞X) k≤10: {dilation}"),
    )
}

fn criterion_13() -> Verdict {
    let mut ok = true;
    let mut rows = Vec::new();
    for k in 1..=4usize {
        let s = finite_group_moment(FiniteGroup::Sq, 4, k).unwrap();
        let h = finite_group_moment(FiniteGroup::Hq, 4, k).unwrap();
        let peven = BigInt::from(count(&CategoryId::Peven, k).unwrap());
        ok &= s == BigInt::from(bell(k as u64)) && h == peven;
        rows.push(format!("k={k}: S4 {s}, H4 {h}"));
    }
    verdict(ok, rows.join("; "))
}

fn main() {
    let suite_start = Instant::now();
    let criteria: Vec<(usize, Box<dyn Fn() -> Verdict>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(|| identity_verdict(Identity::PoissonCount, 8, Some(10), &[(1, 1), (2, 3), (3, 11)]))),
        (3, Box::new(|| identity_verdict(Identity::CatFree, 7, None, &[(2, 7)]))),
        (4, Box::new(|| identity_verdict(Identity::FreeP, 6, None, &[(2, 6)]))),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(criterion_7)),
        (8, Box::new(criterion_8)),
        (9, Box::new(criterion_9)),
        (10, Box::new(criterion_10)),
        (11, Box::new(criterion_11)),
        (12, Box::new(criterion_12)),
        (13, Box::new(criterion_13)),
    ];
    let mut failed = Vec::new();
    let mut unexpected = Vec::new();
    for (n, f) in &criteria {
        let v = f();
        println!("criterion {n:>2}: {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(*n);
            if !v.known_failure {
                unexpected.push(*n);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass in {:.1}s; failing {:?}",
        criteria.len() - failed.len(),
        criteria.len(),
        suite_start.elapsed().as_secs_f64(),
        failed
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance failures: {unexpected:?}");
        std::process::exit(1);
    }
}
