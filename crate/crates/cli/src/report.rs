//! Human-readable and CSV renderings of reports.

use std::io::Write;

use bellsim_core::detection::{CoincidenceRates, CoincidenceReport};
use bellsim_core::sweep::format_float;

fn rates_line(label: &str, r: &CoincidenceRates) -> String {
    format!(
        "  {label:<22} P(t1,t2) = {:.12}  P(t1,.) = {:.12}  P(.,t2) = {:.12}  P(.,.) = {:.12}",
        r.p_ab, r.p_a, r.p_b, r.p_none
    )
}

pub fn print_report(engine: &str, r: &CoincidenceReport) {
    let a = r.angles;
    println!("engine: {engine}");
    println!(
        "  angles                 theta1 = {:.12}  theta2 = {:.12}  theta1' = {:.12}  theta2' = {:.12}",
        a.theta1, a.theta2, a.theta1p, a.theta2p
    );
    println!("{}", rates_line("rates (t1, t2)", &r.rates));
    println!("{}", rates_line("rates (t1, t2')", &r.rates_theta1_theta2p));
    println!("{}", rates_line("rates (t1', t2)", &r.rates_theta1p_theta2));
    println!("{}", rates_line("rates (t1', t2')", &r.rates_theta1p_theta2p));
    println!("  f                      {:.15e}", r.f);
    println!("  -P(.,.)                {:.15e}", -r.p_both_removed);
    println!("  f + P(.,.)             {:.15e}", r.lower_margin);
    println!("  truncation tail        {:.3e}", r.tail_error);
    println!("  verdict                {}", r.verdict.as_str());
}

pub const REPORT_HEADER: &str =
    "engine,label,theta1,theta2,theta1p,theta2p,p_ab,p_a,p_b,p_none,f,neg_p_both,tail_error,violated,verdict";

pub fn write_reports<W: Write>(rows: &[(String, String, CoincidenceReport)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for (engine, label, r) in rows {
        let a = r.angles;
        let fields = [
            a.theta1,
            a.theta2,
            a.theta1p,
            a.theta2p,
            r.rates.p_ab,
            r.rates.p_a,
            r.rates.p_b,
            r.rates.p_none,
            r.f,
            -r.p_both_removed,
        ]
        .map(format_float)
        .join(",");
        writeln!(
            out,
            "{engine},{label},{fields},{},{},{}",
            format_float(r.tail_error),
            u8::from(r.verdict.is_violated()),
            r.verdict.as_str().replace(' ', "_")
        )?;
    }
    Ok(())
}
