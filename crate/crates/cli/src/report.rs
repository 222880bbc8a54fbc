//! Human-readable route reports. Fixed decimals keep output byte-stable.

use std::fmt::Write;

use aanet::graph::WeightedDigraph;
use aanet::link::units;
use aanet::routing::Route;

/// Hop sequence, per-hop `d_tr + d_pr + D_df` breakdown and total, in ms.
pub fn route_report(g: &WeightedDigraph, route: &Route) -> String {
    let dst = *route.hops.last().expect("route has a destination");
    let ids: Vec<&str> = route.hops.iter().map(|&v| g.node(v).id.as_str()).collect();
    let w = ids.iter().map(|s| s.len()).max().unwrap_or(0).max(4);

    let mut out = String::new();
    let _ = writeln!(out, "route: {}", ids.join(" -> "));
    let _ = writeln!(out, "hops: {}", route.hop_count());
    let _ = writeln!(
        out,
        "{:>3}  {:<w$}  {:<w$}  {:>12}  {:>8}  {:>10}  {:>10}  {:>8}  {:>10}",
        "hop", "from", "to", "distance_km", "snr_db", "d_tr_ms", "d_pr_ms", "d_df_ms", "delay_ms"
    );
    for (k, pair) in route.hops.windows(2).enumerate() {
        let e = g.edge(pair[0], pair[1]).expect("route edges exist in the graph");
        let df = if e.to == dst { 0.0 } else { e.df_delay };
        let _ = writeln!(
            out,
            "{:>3}  {:<w$}  {:<w$}  {:>12.3}  {:>8.2}  {:>10.3}  {:>10.3}  {:>8.3}  {:>10.3}",
            k + 1,
            g.node(e.from).id,
            g.node(e.to).id,
            e.distance / 1e3,
            units::linear_to_db(e.snr),
            e.d_tr * 1e3,
            e.d_pr * 1e3,
            df * 1e3,
            route.per_hop_delay[k] * 1e3,
        );
    }
    let _ = writeln!(out, "total_delay_ms: {:.3}", route.total_delay * 1e3);
    out
}
