mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use tpinv::engine::build_vc;
use tpinv::formula::{Formula, LinExpr, Model, Rel, Sort, Value, Variable};
use tpinv::frontend::{parse_transition_system, TransitionSystem};
use tpinv::template::{
    instantiate_template, is_lex_increasing, lex_order_constraints, symbolic_template, TemplateAssignment,
    TemplateShape,
};

fn system() -> TransitionSystem {
    parse_transition_system("system p\nstate x, y : int;\nstate b : bool;").unwrap()
}

fn arb_atom(vars: Vec<Variable>) -> impl Strategy<Value = Formula> {
    let nums: Vec<Variable> = vars.iter().filter(|v| v.sort() == Sort::Int).cloned().collect();
    let rels = prop::sample::select(vec![Rel::Lt, Rel::Le, Rel::Eq, Rel::Ne, Rel::Ge, Rel::Gt]);
    let term = (prop::sample::select(nums.clone()), -3i64..=3);
    (prop::collection::vec(term, 1..=2), rels, -5i64..=5).prop_map(|(terms, rel, c)| {
        let lhs = terms.iter().fold(LinExpr::zero(), |acc, (v, k)| {
            acc.add(&LinExpr::var(v).scale(&tpinv::formula::Rat::from_integer((*k).into())))
        });
        Formula::atom(lhs, rel, LinExpr::int(c))
    })
}

fn arb_formula(vars: Vec<Variable>) -> impl Strategy<Value = Formula> {
    let bools: Vec<Variable> = vars.iter().filter(|v| v.sort() == Sort::Bool).cloned().collect();
    let leaf = prop_oneof![
        arb_atom(vars.clone()),
        prop::sample::select(bools).prop_map(|v| Formula::var(&v)),
        Just(Formula::True),
        Just(Formula::False),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::and),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
}

fn arb_model(vars: Vec<Variable>) -> impl Strategy<Value = Model> {
    let n = vars.len();
    (prop::collection::vec(-6i64..=6, n), prop::collection::vec(any::<bool>(), n)).prop_map(move |(ks, bs)| {
        vars.iter()
            .enumerate()
            .map(|(k, v)| {
                let x = if v.sort() == Sort::Bool {
                    Value::Bool(bs[k])
                } else {
                    Value::int(ks[k])
                };
                (v.clone(), x)
            })
            .collect()
    })
}

fn all_vars(ts: &TransitionSystem) -> Vec<Variable> {
    ts.state.iter().cloned().chain(ts.primed_state()).collect()
}

proptest! {
    #[test]
    fn printing_then_parsing_preserves_meaning(
        f in arb_formula(all_vars(&system())),
        ms in prop::collection::vec(arb_model(all_vars(&system())), 8),
    ) {
        let ts = system();
        let printed = f.to_string();
        let g = ts.parse_formula(&printed, true).unwrap();
        prop_assert_eq!(g.to_string(), printed.clone());
        for m in &ms {
            prop_assert_eq!(f.eval(m), g.eval(m), "{} under {}", printed, m);
        }
    }

    #[test]
    fn lex_constraint_matches_row_comparison(n in 1usize..=3, m in 1usize..=4, code in any::<u64>()) {
        let shape = TemplateShape::new(n, m);
        let b = TemplateAssignment::from_code(shape, code % (1 << shape.bools()));
        let lex = lex_order_constraints(shape);
        prop_assert_eq!(lex.eval(&b.to_model()), Ok(is_lex_increasing(&b)));
    }

    #[test]
    fn distinct_rows_have_one_increasing_permutation(n in 2usize..=3, m in 2usize..=4, code in any::<u64>()) {
        let shape = TemplateShape::new(n, m);
        let b = TemplateAssignment::from_code(shape, code % (1 << shape.bools()));
        let rows: Vec<Vec<bool>> = b.rows().map(|r| r.to_vec()).collect();
        let mut sorted = rows.clone();
        sorted.sort();
        sorted.dedup();
        prop_assume!(sorted.len() == n);
        let perms: Vec<Vec<usize>> = if n == 2 {
            vec![vec![0, 1], vec![1, 0]]
        } else {
            vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]
        };
        let increasing = perms
            .iter()
            .filter(|p| is_lex_increasing(&TemplateAssignment::from_rows(&p.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>())))
            .count();
        prop_assert_eq!(increasing, 1);
    }

    #[test]
    fn grounding_commutes_with_instantiation(
        code in 0u64..1 << 16,
        sigma in arb_model(coin_quantified()),
    ) {
        let (ts, preds) = load("coin.ts");
        let vc = build_vc(&ts, &preds, TemplateShape::new(2, preds.len())).unwrap();
        let b = TemplateAssignment::from_code(vc.shape, code);
        let ground = vc.ground(&sigma);
        let inst = vc.instantiate(&b);
        prop_assert!(ground.is_propositional());
        prop_assert_eq!(ground.eval(&b.to_model()), inst.eval(&sigma));
    }
}

fn coin_quantified() -> Vec<Variable> {
    load("coin.ts").0.quantified_vars()
}

#[test]
fn symbolic_template_agrees_with_instantiation() {
    use rand::{Rng, SeedableRng};
    let ts = parse_transition_system("system q\nstate x, y : int;").unwrap();
    let preds = tpinv::template::PredicateSet::new(
        ["x >= 0", "y > x", "x + y = 3", "y <= -1"].iter().map(|p| f(&ts, p)).collect(),
    );
    let shape = TemplateShape::new(3, 4);
    let t = symbolic_template(&preds, shape);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let b = TemplateAssignment::from_code(shape, rng.gen_range(0..1 << 12));
        let direct = instantiate_template(&preds, &b).unwrap();
        let via = t.substitute(&b.binding()).unwrap();
        assert!(same(&ts, &direct, &via), "{b:?}: {direct} vs {via}");
    }
}

/// Step a node with the reference interpreter and check every step against
/// its translation's `S`, `C` and `T`.
fn run_against_translation(name: &str, inputs: &[Vec<Value>]) -> Result<(), String> {
    let np = source(name).node.unwrap();
    let tr = np.translate().map_err(|e| e.to_string())?;
    let ts = &tr.ts;
    let mut it = tpinv::frontend::NodeInterpreter::new(&np);
    let default = |v: &Variable| match v.sort() {
        Sort::Bool => Value::Bool(false),
        _ => Value::int(0),
    };
    let state_of = |prev: Option<&BTreeMap<String, Value>>, first: bool| -> Model {
        let mut s: Model = tr
            .memories
            .iter()
            .map(|(flow, var, init)| {
                let x = match prev {
                    Some(p) => p[flow].clone(),
                    None => init.clone().unwrap_or_else(|| default(var)),
                };
                (var.clone(), x)
            })
            .collect();
        if let Some(fl) = &tr.first_flag {
            s.insert(fl.clone(), Value::Bool(first));
        }
        s
    };
    let mut sigma = state_of(None, true);
    if ts.init.eval(&sigma) != Ok(true) {
        return Err(format!("{name}: initial state {sigma} violates S"));
    }
    for (t, row) in inputs.iter().enumerate() {
        let named: BTreeMap<String, Value> = ts.inputs.iter().map(|v| v.name().to_string()).zip(row.iter().cloned()).collect();
        let env = it.step(&named)?;
        let next = state_of(Some(&env), false);
        let mut m = sigma.clone();
        for v in ts.inputs.iter().chain(&ts.outputs) {
            m.insert(v.clone(), env[v.name()].clone());
        }
        m.extend(&next.rename(|v| Some(v.primed())));
        if ts.guard.eval(&m) != Ok(true) || ts.trans.eval(&m) != Ok(true) {
            return Err(format!("{name}: step {t} {m} violates C and T"));
        }
        sigma = next;
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn clicker_interpreter_follows_translation(ds in prop::collection::vec(-4i64..=4, 100)) {
        let rows: Vec<Vec<Value>> = ds.into_iter().map(|d| vec![Value::int(d)]).collect();
        run_against_translation("clicker.node", &rows).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn toggle_interpreter_follows_translation(ps in prop::collection::vec(any::<bool>(), 100)) {
        let rows: Vec<Vec<Value>> = ps.into_iter().map(|p| vec![Value::Bool(p)]).collect();
        run_against_translation("toggle.node", &rows).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn thermostat_interpreter_follows_translation(ts in prop::collection::vec(10i64..=30, 100)) {
        let rows: Vec<Vec<Value>> = ts.into_iter().map(|t| vec![Value::int(t)]).collect();
        run_against_translation("thermostat.node", &rows).map_err(TestCaseError::fail)?;
    }
}
