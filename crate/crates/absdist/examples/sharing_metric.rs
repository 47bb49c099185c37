//! Set-sharing substitutions: lattice operations, abstract unification,
//! widening, and an exhaustive check of the size-based metric.

use absdist::domain::sharing::{sh_distance, ShWidenParams, SharingSub};
use absdist::lattice::{check_metric_properties, CheckConfig};
use absdist::parser::parse_term;

fn main() -> anyhow::Result<()> {
    let vars: Vec<String> = ["X", "Y", "Z"].map(String::from).to_vec();
    let fresh = SharingSub::fresh(&vars)?;
    let top = SharingSub::top(&vars)?;
    println!("fresh {fresh}  top {top}  d = {:.4}", sh_distance(&fresh, &top)?);

    let aliased = fresh.amgu("X", &parse_term("f(Y)")?);
    println!("X = f(Y): {aliased}");
    let grounded = aliased.amgu("Y", &parse_term("a")?);
    println!("then Y = a: {grounded}");

    let wide = fresh.widen(ShWidenParams::new(2)?);
    println!("widened past 2 groups: {wide}  d(fresh, widened) = {:.4}", sh_distance(&fresh, &wide)?);

    let all = SharingSub::enumerate(&vars)?;
    let report = check_metric_properties(&all, |a, b| sh_distance(a, b).unwrap(), &CheckConfig::default());
    println!("{report}");
    Ok(())
}
