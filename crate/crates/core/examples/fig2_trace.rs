//! Walks constraint-generation iLAO* through the five-state fixture and
//! prints what each iteration expanded, repaired and left pending.
use sspkit::domains::fig2_example;
use sspkit::heuristics::Heuristic;
use sspkit::solvers::{cg_ilao_solve, SolverConfig};

fn main() {
    let (ssp, table) = fig2_example();
    let h = Heuristic::from_table("bundled", table);
    let cfg = SolverConfig::default().with_trace().watching_values();
    let r = cg_ilao_solve(&ssp, &h, &cfg).expect("fixture solves");

    let name = |s| ssp.name(s).to_string();
    let pair = |&(s, a): &(_, usize)| format!("({}, {})", name(s), ssp.actions(s)[a].name);
    for it in &r.trace {
        println!("iteration {}", it.iteration);
        for (s, ords) in &it.expanded {
            let acts: Vec<_> = ords.iter().map(|&a| ssp.actions(*s)[a].name.as_str()).collect();
            println!("  expanded {} with {:?}", name(*s), acts);
        }
        let vals: Vec<_> = it
            .values_after_backups
            .iter()
            .map(|&(s, v)| format!("{}={v}", name(s)))
            .collect();
        println!("  after backups: {}", vals.join(" "));
        let pending: Vec<_> = it.violations_after_backups.iter().map(pair).collect();
        println!("  pending: {{{}}}", pending.join(", "));
        for f in &it.fixes {
            println!(
                "  repaired V({}) {} -> {} via {}",
                name(f.state),
                f.from,
                f.to,
                ssp.actions(f.state)[f.ordinal].name
            );
        }
        let pending: Vec<_> = it.violations_after_fix.iter().map(pair).collect();
        println!("  pending after repair: {{{}}}", pending.join(", "));
    }
    println!(
        "V(s0) = {} after {} iterations, {} value decreases",
        r.v_s0,
        r.iterations,
        r.value_decreases().unwrap_or(0)
    );
}
