//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use omqlab::chase::{canonical_model, ChaseDb, Provenance};
use omqlab::dllitef::{decide_ubcq1_equiv, id_f_cq, rew, satisfies_functionality, split_ontology};
use omqlab::entailment::{is_consistent, subsumes};
use omqlab::eval::{evaluate_fpt, evaluate_naive};
use omqlab::gen::{
    random_concept, random_cq, random_database, random_dllite_f, random_ontology, random_tw_database, random_ucq,
    Signature,
};
use omqlab::graphalg::{cq_treewidth, k_unravel, projection_is_homomorphism};
use omqlab::homtools::{core, find_homomorphism, find_homomorphism_in, Target, VarMap};
use omqlab::model::{concept_as_cq, Atom, Concept, Cq, Dialect, Fresh, Name, Omq, Ontology, Schema, Ucq};
use omqlab::pebble::pebble_answers;
use omqlab::surface::{parse_database, parse_ontology, parse_query, parse_schema, read_text};
use omqlab::treelike::{
    contains_full_schema, decide_tw_equiv_full, decide_tw_equiv_general, equivalent_full_schema, isomorphic,
    omq_entails, ucq_k_approximation, TwEquivVerdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fixture(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel);
    read_text(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    check(t.elapsed() < limit, || format!("took {:.1?}, limit {limit:?}", t.elapsed()))
}

fn example_one() -> Outcome {
    let t = Instant::now();
    let q = parse_query(&fixture("grid/query.cq")).unwrap();
    let p = &q.disjuncts[0];
    let tw = cq_treewidth(p).unwrap();
    check(tw == 2, || format!("treewidth {tw}"))?;
    check(isomorphic(&core(p), p), || "core is smaller than the query".into())?;
    let o1 = parse_ontology(&fixture("grid/onto_yes.dl")).unwrap();
    let q1 = Omq::new(o1, Schema::full(), q.clone());
    let TwEquivVerdict::Yes(w) = decide_tw_equiv_full(&q1, 1).unwrap() else {
        return Err("Q1 not recognized as CQ_1-equivalent".into());
    };
    check(w.query.disjuncts.iter().all(|d| cq_treewidth(d).unwrap() <= 1), || format!("witness {}", w.query))?;
    check(equivalent_full_schema(&q1, &w).unwrap(), || "witness not equivalent".into())?;
    let bare = Omq::new(Ontology::empty(), Schema::full(), q);
    check(decide_tw_equiv_full(&bare, 1).unwrap().is_no(), || "empty ontology not rejected".into())?;
    within(t, Duration::from_secs(10))?;
    Ok(format!("tw 2, core = q, witness {}", w.query.disjuncts[0]))
}

fn schema_sensitivity() -> Outcome {
    let t = Instant::now();
    let q = parse_query(&fixture("grid/query.cq")).unwrap();
    let o2 = parse_ontology(&fixture("grid/onto_no.dl")).unwrap();
    let full = Omq::new(o2.clone(), Schema::full(), q.clone());
    let TwEquivVerdict::No(Some(cx)) = decide_tw_equiv_general(&full, 1, 6).unwrap() else {
        return Err("full schema: no counterexample".into());
    };
    let consts = cx.database.domain().len();
    check(consts <= 6, || format!("counterexample has {consts} constants"))?;
    let qa = ucq_k_approximation(&full, 1).unwrap();
    check(omq_entails(&o2, &q, &cx.database, &cx.tuple).unwrap(), || "counterexample misses Q".into())?;
    check(!omq_entails(&o2, &qa.query, &cx.database, &cx.tuple).unwrap(), || "counterexample satisfies Q_a".into())?;
    let s = parse_schema(&fixture("grid/schema_no_a1.txt")).unwrap();
    let partial = Omq::new(o2, s, q);
    let v = decide_tw_equiv_general(&partial, 1, 6).unwrap();
    check(matches!(v, TwEquivVerdict::Unknown(_)), || format!("restricted schema gave {}", v.label()))?;
    within(t, Duration::from_secs(300))?;
    Ok(format!("full: NO with {consts}-constant database; without A1: UNKNOWN"))
}

fn detour_witnesses() -> Outcome {
    let t = Instant::now();
    let o = parse_ontology(&fixture("detour/ontology.dl")).unwrap();
    check(o.axioms.len() == 16, || format!("{} axioms", o.axioms.len()))?;
    let s = parse_schema(&fixture("detour/schema.txt")).unwrap();
    let q = parse_query(&fixture("grid/query.cq")).unwrap();
    let phi = parse_query(&fixture("detour/phi.cq")).unwrap();
    let d1 = parse_database(&fixture("detour/d1.db")).unwrap();
    let d2 = parse_database(&fixture("detour/d2.db")).unwrap();
    let holds = |ucq: Ucq, d| evaluate_naive(&Omq::new(o.clone(), s.clone(), ucq), d).unwrap().holds();
    for (name, d) in [("D1", &d1), ("D2", &d2)] {
        check(holds(q.clone(), d), || format!("Q fails on {name}"))?;
    }
    let phi1 = Ucq::single(phi.disjuncts[0].clone());
    let phi2 = Ucq::single(phi.disjuncts[1].clone());
    check(holds(phi1, &d2), || "phi1 fails on D2".into())?;
    check(holds(phi2, &d1), || "phi2 fails on D1".into())?;
    within(t, Duration::from_secs(30))?;
    Ok("Q holds on D1 and D2; phi2 on D1, phi1 on D2".into())
}

fn tri_agreement() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sig = Signature::new(3, 2);
    let n = 600;
    let mut nonempty = 0;
    for i in 0..n {
        let k = rng.gen_range(1..=2);
        let o = random_ontology(&mut rng, Dialect::ElhdrBot, &sig, 8, 2);
        let arity = rng.gen_range(0..=1);
        let q = random_ucq(&mut rng, &sig, 6, k, arity, 2);
        let nconsts = rng.gen_range(2..=8);
        let d = random_database(&mut rng, &sig, nconsts, 2 * nconsts);
        let omq = Omq::new(o, Schema::full(), q);
        let naive = evaluate_naive(&omq, &d).unwrap();
        let fpt = evaluate_fpt(&omq, &d, k).unwrap();
        let pebble = pebble_answers(&omq, &d, k).unwrap();
        check(naive.answers == fpt.answers && naive.answers == pebble.answers, || {
            format!("triple #{i} disagrees: {:?} / {} / {d}", omq.ontology.axioms, omq.query)
        })?;
        nonempty += (naive.consistent && !naive.answers.is_empty()) as usize;
    }
    within(t, Duration::from_secs(600))?;
    Ok(format!("{n} triples, 0 disagreements ({nonempty} with answers)"))
}

fn approximation() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sig = Signature::new(3, 2);
    let (mut instances, mut dbs, mut positive) = (0, 0, 0);
    while dbs < 240 {
        let k = rng.gen_range(1..=2);
        let dialect = if rng.gen_bool(0.5) { Dialect::ElhdrBot } else { Dialect::EliBot };
        let o = random_ontology(&mut rng, dialect, &sig, 5, 2);
        let arity = rng.gen_range(0..=1);
        let q = random_ucq(&mut rng, &sig, 5, 3, arity, 2);
        let omq = Omq::new(o, Schema::full(), q);
        let qa = ucq_k_approximation(&omq, k).unwrap();
        check(contains_full_schema(&qa, &omq).unwrap(), || format!("Q_a not contained in Q for {}", omq.query))?;
        instances += 1;
        for _ in 0..3 {
            let nconsts = rng.gen_range(2..=7);
            let d = random_tw_database(&mut rng, &sig, nconsts, k);
            let full = evaluate_naive(&omq, &d).unwrap();
            let approx = evaluate_naive(&qa, &d).unwrap();
            check(full.answers == approx.answers, || format!("Q(D) != Q_a(D) for {} on {d}", omq.query))?;
            dbs += 1;
            positive += (!full.answers.is_empty()) as usize;
        }
    }
    within(t, Duration::from_secs(600))?;
    Ok(format!("{instances} containments, {dbs} databases ({positive} with answers)"))
}

fn grohe() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sig = Signature::new(2, 2);
    let mut yes = [0; 2];
    for _ in 0..100 {
        let n = rng.gen_range(2..=7);
        let arity = rng.gen_range(0..=1);
        let q = random_cq(&mut rng, &sig, n, 3, arity);
        let omq = Omq::new(Ontology::empty(), Schema::full(), Ucq::single(q.clone()));
        let tw = cq_treewidth(&core(&q)).unwrap();
        for k in 1..=2 {
            let v = decide_tw_equiv_full(&omq, k).unwrap();
            check(v.is_yes() == (tw <= k), || format!("{q}: k={k}, core tw {tw}, verdict {}", v.label()))?;
            yes[k - 1] += v.is_yes() as usize;
        }
    }
    Ok(format!("100 CQs, yes for k=1: {}, k=2: {}", yes[0], yes[1]))
}

fn unraveling_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let sig = Signature::new(3, 2);
    let mut consistent = 0;
    for i in 0..100 {
        let k = rng.gen_range(1..=2);
        let o = random_ontology(&mut rng, Dialect::EliBot, &sig, 4, 2);
        let arity = rng.gen_range(0..=1);
        let q = random_ucq(&mut rng, &sig, 3, k, arity, 2);
        let d = random_database(&mut rng, &sig, 4, 7);
        let dom: Vec<Name> = d.domain().into_iter().collect();
        let a: Vec<Name> = (0..arity).map(|_| dom[rng.gen_range(0..dom.len())].clone()).collect();
        let depth = q.disjuncts.iter().map(|p| p.vars.len()).max().unwrap() + 1;
        let u = k_unravel(&d, &a, k, depth).unwrap();
        check(projection_is_homomorphism(&u, &d), || format!("#{i}: projection is not a homomorphism"))?;
        let c_orig = is_consistent(&d, &o).unwrap();
        let c_unr = is_consistent(&u.database, &o).unwrap();
        check(c_orig == c_unr, || format!("#{i}: consistency {c_orig} vs {c_unr}"))?;
        if !c_orig {
            continue;
        }
        consistent += 1;
        let steps = depth;
        let ch_u = canonical_model(&u.database, &o, steps).unwrap();
        let ch_d = canonical_model(&d, &o, steps).unwrap();
        check(chase_transport(&ch_u, &ch_d, &u.projection), || {
            format!("#{i}: no homomorphism between canonical models")
        })?;
        let in_d = omq_entails(&o, &q, &d, &a).unwrap();
        let in_u = omq_entails(&o, &q, &u.database, &a).unwrap();
        check(in_d == in_u, || format!("#{i}: answer {in_d} on D but {in_u} on the unraveling; O {:?}; q {q}; D {d}; a {a:?}; depth {depth}", o.axioms))?;
    }
    Ok(format!("100 instances ({consistent} consistent), laws 1-4 hold"))
}

/// A homomorphism from `from` to `to` extending `pi` on original constants,
/// searched independently for each anonymous tree.
fn chase_transport(from: &ChaseDb, to: &ChaseDb, pi: &BTreeMap<Name, Name>) -> bool {
    let target = Target::new(&to.facts);
    let root = |c: &Name| {
        let mut cur = c.clone();
        loop {
            match &from.provenance[&cur] {
                Provenance::Original => return cur,
                Provenance::TypeCopy { origin, .. } => return origin.clone(),
                Provenance::Anonymous { parent, .. } => cur = parent.clone(),
            }
        }
    };
    let mut trees: BTreeMap<Name, Vec<Atom>> = BTreeMap::new();
    for f in &from.facts.facts {
        let anon = f.terms().into_iter().find(|t| !pi.contains_key(*t)).cloned();
        match anon {
            Some(t) => trees.entry(root(&t)).or_default().push(f.clone()),
            None => {
                if !to.facts.facts.contains(&f.map_terms(|t| pi[t].clone())) {
                    return false;
                }
            }
        }
    }
    trees.into_values().all(|atoms| {
        let q = Cq::from_parts(vec![], atoms);
        let fixed: VarMap = q.vars.iter().filter_map(|v| pi.get(v).map(|p| (v.clone(), p.clone()))).collect();
        find_homomorphism_in(&q, &target, &fixed).is_some()
    })
}

fn dllite_f() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sig = Signature::new(3, 2);
    let empty = Ontology::new(Dialect::DlLiteF, vec![]).unwrap();
    let (mut dbs, mut positive) = (0, 0);
    while dbs < 250 {
        let o = random_dllite_f(&mut rng, &sig, 5);
        let q = random_ucq(&mut rng, &sig, 4, 1, 0, 2);
        let split = split_ontology(&o).unwrap();
        let r = rew(&Omq::new(o.clone(), Schema::full(), q.clone())).unwrap();
        for _ in 0..3 {
            let d = random_database(&mut rng, &sig, 4, 7);
            if !satisfies_functionality(&d, &split.functionalities) {
                continue;
            }
            let truth = omq_entails(&split.inclusions, &q, &d, &[]).unwrap();
            let got = omq_entails(&empty, &r, &d, &[]).unwrap();
            check(truth == got, || format!("rew disagrees: {:?} / {q} / {d}", o.axioms))?;
            dbs += 1;
            positive += truth as usize;
        }
    }
    let funcs: BTreeSet<Name> = sig.roles.iter().cloned().collect();
    for _ in 0..300 {
        let n = rng.gen_range(2..=8);
        let p = random_cq(&mut rng, &sig, n, 1, 0);
        let m = id_f_cq(&p, &funcs);
        check(cq_treewidth(&m).unwrap() <= 1, || format!("id_F raised treewidth: {p} -> {m}"))?;
    }
    let func = parse_ontology(&fixture("dllitef/func.dl")).unwrap();
    let merge = parse_query(&fixture("dllitef/merge.cq")).unwrap();
    let cycle = parse_query(&fixture("dllitef/cycle.cq")).unwrap();
    let v = decide_ubcq1_equiv(&Omq::new(func.clone(), Schema::full(), merge)).unwrap();
    check(v.is_yes(), || format!("functional merge gave {}", v.label()))?;
    let v = decide_ubcq1_equiv(&Omq::new(func, Schema::full(), cycle)).unwrap();
    check(v.is_no(), || format!("two-role cycle gave {}", v.label()))?;
    within(t, Duration::from_secs(600))?;
    Ok(format!("{dbs} databases ({positive} positive), id_F keeps tw 1, fixtures YES/NO"))
}

fn chase_subsumes(o: &Ontology, c: &Concept, d: &Concept, depth: usize) -> bool {
    let a = Name::new("a");
    let mut fresh = Fresh::new("v", [a.clone()]);
    let cq = concept_as_cq(c, &a, &mut fresh).unwrap();
    let mut db = omqlab::model::cq_as_database(&cq);
    if db.is_empty() {
        db.insert(Atom::unary("Top_", a.clone()));
    }
    let model = match omqlab::chase::oblivious_chase(&db, o, depth) {
        Ok(m) => m,
        Err(omqlab::Error::Inconsistent) => return true,
        Err(e) => panic!("{e}"),
    };
    let target = concept_as_cq(d, &a, &mut Fresh::new("w", [a.clone()])).unwrap();
    if target.atoms.is_empty() {
        return true;
    }
    let fixed = [(a.clone(), a.clone())].into_iter().collect();
    find_homomorphism(&target, &model.facts, &fixed).is_some()
}

fn subsumption() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let sig = Signature::new(3, 2);
    let mut positive = 0;
    for i in 0..500 {
        let o = random_ontology(&mut rng, Dialect::EliBot, &sig, 6, 2);
        let incl = o.inclusions();
        let (c, d) = if !incl.is_empty() && rng.gen_bool(0.5) {
            let (l, _) = &incl[rng.gen_range(0..incl.len())];
            let (_, r) = &incl[rng.gen_range(0..incl.len())];
            let r = if *r == Concept::Bot { random_concept(&mut rng, &sig, 1, true) } else { r.clone() };
            (l.clone(), r)
        } else {
            (random_concept(&mut rng, &sig, 3, true), random_concept(&mut rng, &sig, 3, true))
        };
        let depth = concept_depth(&d) + max_axiom_depth(&o) + o.axioms.len();
        let oracle = chase_subsumes(&o, &c, &d, depth);
        let deeper = chase_subsumes(&o, &c, &d, depth + 3);
        check(oracle == deeper, || format!("#{i}: chase unstable between depth {depth} and {}", depth + 3))?;
        let got = subsumes(&o, &c, &d).unwrap();
        check(got == oracle, || format!("#{i}: {:?} |= {c} <= {d}: subsumes {got}, chase {oracle}", o.axioms))?;
        positive += got as usize;
    }
    Ok(format!("500 instances ({positive} entailed), depth-stable"))
}

fn concept_depth(c: &Concept) -> usize {
    match c {
        Concept::Exists(_, f) => 1 + concept_depth(f),
        Concept::Conj(cs) => cs.iter().map(concept_depth).max().unwrap_or(0),
        _ => 0,
    }
}

fn max_axiom_depth(o: &Ontology) -> usize {
    o.inclusions().iter().map(|(l, r)| concept_depth(l).max(concept_depth(r))).max().unwrap_or(0)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("worked example: treewidth, core and tw-1 witness", example_one),
        ("worked example: schema sensitivity", schema_sensitivity),
        ("non-tree-like witnesses fixtures", detour_witnesses),
        ("tri-agreement naive/fpt/pebble", tri_agreement),
        ("approximation soundness and completeness on tw-k databases", approximation),
        ("base case without ontology", grohe),
        ("unraveling laws", unraveling_laws),
        ("DL-Lite^F rewriting and UBCQ_1 equivalence", dllite_f),
        ("subsumption vs bounded chase", subsumption),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}; {secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({why}; {secs:.2}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
