//! End-to-end acceptance gate. Each test covers one criterion and prints
//! one pass/fail line; run with `--nocapture` to see the lines on
//! success.

use std::cmp::Ordering;

use cpspheres::arena;
use cpspheres::eval::{self};
use cpspheres::fixtures;
use cpspheres::formula::{parse, parse_cp_set, Formula};
use cpspheres::model::Centering;
use cpspheres::search::{self, AxiomSystem, EnumerationBounds, SweepReport};
use cpspheres::update::{update, UpdateTag};
use cpspheres::weights::{cmp_xel, weight_of_formula};

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {}{}",
        if ok { "PASS" } else { "FAIL" },
        if detail.is_empty() { String::new() } else { format!(" ({detail})") }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn clean(criterion: &str, r: &SweepReport) {
    let detail = format!(
        "{} models, {} checks, {} violations{}",
        r.models,
        r.checks,
        r.violations.len(),
        r.violations
            .first()
            .map(|v| format!("; first: {} at {} on {}", v.check, v.world, v.formula))
            .unwrap_or_default()
    );
    report(criterion, r.violations.is_empty(), &detail);
}

#[test]
fn criterion_1_weight_tables() {
    let m = fixtures::nixon();
    let x = m.world_named("x").unwrap();
    let w = |src: &str| weight_of_formula(&m, x, &parse(src).unwrap(), UpdateTag::Disagreement).unwrap();
    let mut ok = w("p").counts == [0, 1, 1, 1, 1]
        && w("~p").counts == [1, 0, 0, 0, 0]
        && w("e1").counts == [0, 1, 1, 0, 0]
        && w("~l").counts == [1, 1, 1, 0, 0]
        && w("h").counts == [0, 0, 0, 1, 1];
    // The full plausibility chain, lightest first, with the tie pattern:
    // ~h = ~l < ~e1 = ~e2 < ~p < p < e1 = e2 < h = l.
    let chain = ["~h", "~l", "~e1", "~e2", "~p", "p", "e1", "e2", "h", "l"];
    let ties = [true, false, true, false, false, false, true, false, true];
    for (i, tie) in ties.iter().enumerate() {
        let cmp = cmp_xel(&w(chain[i]), &w(chain[i + 1]));
        ok &= cmp == if *tie { Ordering::Equal } else { Ordering::Less };
    }
    report("1 (weight tables)", ok, "printed weights and full chain");
}

#[test]
fn criterion_2_update_fixtures() {
    let m = fixtures::nixon();
    let x = m.world_named("x").unwrap();
    let g = parse_cp_set("e1, e2, ~e1, ~e2").unwrap();
    let g_prime = parse_cp_set("e1, e2, ~e1, ~e2, l, ~l").unwrap();
    let chain_of = |set| {
        update(&m, x, set, UpdateTag::Disagreement)
            .unwrap()
            .system(x)
            .spheres
            .iter()
            .map(|&s| m.format_worlds(s))
            .collect::<Vec<_>>()
    };
    let ok = chain_of(&g) == ["{x}", "{x y1}", "{x y1 y2}", "{x v1 y1 y2}", "{x v1 v2 y1 y2}"]
        && chain_of(&g_prime)
            == m.system(x).spheres.iter().map(|&s| m.format_worlds(s)).collect::<Vec<_>>();
    report("2 (update fixtures)", ok, "d-update chains for both sets");
}

#[test]
fn criterion_3_verdict_fixtures() {
    let m = fixtures::nixon();
    let x = m.world_named("x").unwrap();
    let mut ok = eval::sat(&m, x, &parse("p =>[e1,e2,~e1,~e2] h").unwrap(), UpdateTag::Disagreement)
        .unwrap()
        && !eval::sat(
            &m,
            x,
            &parse("p =>[e1,e2,~e1,~e2,l,~l] h").unwrap(),
            UpdateTag::Disagreement,
        )
        .unwrap();
    // Non-paired sets give contradictory verdicts for the same question.
    let p = Formula::atom("p");
    let h = Formula::atom("h");
    let delta = parse_cp_set("e1, e2, l").unwrap();
    let delta_bar = parse_cp_set("~e1, ~e2, ~l").unwrap();
    ok &= !arena::eval_disagreement(&m, x, &p, &h, &delta).unwrap()
        && arena::eval_disagreement(&m, x, &p, &h, &delta_bar).unwrap();
    // The four-method comparison grid, cell for cell.
    let g = parse_cp_set("e1, e2, ~e1, ~e2").unwrap();
    let g_prime = parse_cp_set("e1, e2, ~e1, ~e2, l, ~l").unwrap();
    let rows = vec![
        (p.clone(), g.clone(), h.clone()),
        (p.clone(), g_prime.clone(), h.clone()),
        (p.clone(), g, Formula::not(h.clone())),
        (p, g_prime, Formula::not(h)),
    ];
    let grid: Vec<[bool; 4]> = arena::comparison_table(&m, x, &rows)
        .unwrap()
        .iter()
        .map(|r| [r.cp, r.nc, r.ms, r.dis])
        .collect();
    ok &= grid
        == vec![
            [true, true, true, true],
            [true, true, false, false],
            [false, false, false, false],
            [true, false, false, true],
        ];
    report("3 (verdict fixtures)", ok, "example verdicts, contradiction demo, comparison grid");
}

#[test]
fn criterion_4_weakly_centered_divergence() {
    let m = fixtures::nixon_weak();
    let x = m.world_named("x").unwrap();
    let f = parse("p =>[e1, ~e1] h").unwrap();
    let under_d = eval::sat(&m, x, &f, UpdateTag::Disagreement).unwrap();
    let under_i = eval::sat(&m, x, &f, UpdateTag::Implausibility).unwrap();
    report(
        "4 (weakly centered d/i divergence)",
        under_d != under_i,
        &format!("d gives {under_d}, i gives {under_i}"),
    );
}

#[test]
fn criterion_5_theorem_sweeps() {
    let b = EnumerationBounds::new(3, &["p", "q"], Centering::Centered);
    clean("5 (theorem sweeps)", &search::theorem_sweep(&b).unwrap());
}

#[test]
fn criterion_6_axiom_soundness() {
    let weak = EnumerationBounds::new(3, &["p", "q"], Centering::Weak);
    let centered = EnumerationBounds::new(3, &["p", "q"], Centering::Centered);
    let vw = search::axiom_instances(AxiomSystem::VW, &["p", "q"]);
    let vc = search::axiom_instances(AxiomSystem::VC, &["p", "q"]);
    let mut total = SweepReport::default();
    for u in UpdateTag::ALL {
        for (bounds, system, instances) in
            [(&weak, AxiomSystem::VW, &vw), (&centered, AxiomSystem::VC, &vc)]
        {
            let r = search::check_axioms(bounds, system, u, instances).unwrap();
            total.models += r.models;
            total.checks += r.checks;
            total.violations.extend(r.violations);
        }
    }
    clean("6 (axiom soundness)", &total);
}

#[test]
fn criterion_7_translation() {
    let b = EnumerationBounds::new(3, &["p", "q"], Centering::Centered);
    clean("7 (translation)", &search::translation_sweep(&b).unwrap());
}

#[test]
fn criterion_8_interdefinability() {
    let b = EnumerationBounds::new(3, &["p", "q"], Centering::Centered);
    clean("8 (interdefinability)", &search::interdefinability_sweep(&b).unwrap());
}

#[test]
fn criterion_9_preservation() {
    let mut total = SweepReport::default();
    for centering in [Centering::Centered, Centering::Weak] {
        let b = EnumerationBounds::new(3, &["p", "q"], centering);
        let r = search::preservation_sweep(&b).unwrap();
        total.models += r.models;
        total.checks += r.checks;
        total.violations.extend(r.violations);
    }
    clean("9 (preservation)", &total);
}
