//! A small CDCL SAT solver: two watched literals, first-UIP learning,
//! activity-based branching with phase saving, Luby restarts, and solving
//! under assumptions.

/// Literal: `2·var + sign`, sign 1 = negated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: usize, negated: bool) -> Lit {
        Lit((var as u32) << 1 | negated as u32)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(Default)]
pub struct SatSolver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    model: Vec<bool>,
    root_unsat: bool,
    pub conflicts: u64,
}

fn luby(mut x: u64) -> u64 {
    // Position x (0-based) of the sequence 1 1 2 1 1 2 4 ...
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1 << seq
}

impl SatSolver {
    pub fn new() -> Self {
        SatSolver {
            var_inc: 1.0,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assign.len()
    }

    pub fn new_var(&mut self) -> usize {
        let v = self.assign.len();
        self.assign.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    fn value(&self, l: Lit) -> i8 {
        let a = self.assign[l.var()];
        if l.is_neg() {
            -a
        } else {
            a
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var();
        self.assign[v] = if l.is_neg() { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl];
        for k in (start..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var();
            self.phase[v] = !l.is_neg();
            self.assign[v] = UNDEF;
            self.reason[v] = None;
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl);
        self.qhead = self.trail.len();
    }

    /// Add a clause permanently. Returns false once the clause set is
    /// unsatisfiable at the root.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        self.cancel_until(0);
        if self.root_unsat {
            return false;
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return true;
        }
        c.retain(|&l| self.value(l) != FALSE);
        match c.len() {
            0 => {
                self.root_unsat = true;
                false
            }
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.root_unsat = true;
                }
                !self.root_unsat
            }
            _ => {
                self.attach(c);
                true
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let ci = self.clauses.len();
        self.watches[c[0].index()].push(ci);
        self.watches[c[1].index()].push(ci);
        self.clauses.push(c);
        ci
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut k = 0;
            while k < ws.len() {
                let ci = ws[k];
                k += 1;
                if conflict.is_some() {
                    kept.push(ci);
                    continue;
                }
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                let first_val = {
                    let a = self.assign[first.var()];
                    if first.is_neg() {
                        -a
                    } else {
                        a
                    }
                };
                if first_val == TRUE {
                    kept.push(ci);
                    continue;
                }
                let mut moved = false;
                for j in 2..c.len() {
                    let l = c[j];
                    let a = self.assign[l.var()];
                    let val = if l.is_neg() { -a } else { a };
                    if val != FALSE {
                        c.swap(1, j);
                        let w = c[1];
                        self.watches[w.index()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                kept.push(ci);
                if first_val == FALSE {
                    conflict = Some(ci);
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            // Watches added to false_lit during the scan (none expected) are kept.
            let added = std::mem::take(&mut self.watches[false_lit.index()]);
            kept.extend(added);
            self.watches[false_lit.index()] = kept;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, usize) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let start = usize::from(p.is_some());
            let lits = self.clauses[confl].clone();
            for &q in &lits[start..] {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var()] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var()] > self.level[learnt[best].var()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            bt = self.level[learnt[1].var()];
        }
        self.var_inc /= 0.95;
        (learnt, bt)
    }

    fn pick_branch(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 0..self.assign.len() {
            if self.assign[v] == UNDEF && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best
    }

    /// Solve under assumptions. `true` = satisfiable; the model is then
    /// available through [`SatSolver::model_value`].
    pub fn solve(&mut self, assumptions: &[Lit]) -> bool {
        self.cancel_until(0);
        if self.root_unsat {
            return false;
        }
        if self.propagate().is_some() {
            self.root_unsat = true;
            return false;
        }
        let mut restart = 0u64;
        let mut budget = 100 * luby(restart);
        let mut since_restart = 0u64;
        let result = loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.root_unsat = true;
                    break false;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let l0 = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(l0, Some(ci));
                }
                continue;
            }
            if since_restart >= budget {
                since_restart = 0;
                restart += 1;
                budget = 100 * luby(restart);
                self.cancel_until(0);
                continue;
            }
            if self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match self.value(a) {
                    TRUE => self.trail_lim.push(self.trail.len()),
                    FALSE => break false,
                    _ => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, None);
                    }
                }
                continue;
            }
            match self.pick_branch() {
                None => {
                    self.model = self.assign.iter().map(|&a| a == TRUE).collect();
                    break true;
                }
                Some(v) => {
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(Lit::new(v, !self.phase[v]), None);
                }
            }
        };
        self.cancel_until(0);
        result
    }

    pub fn model_value(&self, var: usize) -> bool {
        self.model.get(var).copied().unwrap_or(false)
    }
}
