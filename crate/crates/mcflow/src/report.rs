//! Report and figure emission: JSON with stable key order and 17 significant
//! digits, header-row CSV with LF line endings, and 8-bit PGM heatmaps with
//! the value range recorded in a header comment.
//!
//! Serialization is hand-rolled so identical runs produce byte-identical
//! artifacts.

use crate::analyze::{LipschitzOutcome, SingularSetReport};
use crate::arrival::ArrivalField;
use crate::evolve::DiagnosticsLog;

/// 17 significant digits, locale-free; non-finite values become null.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn float_array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", items.join(","))
}

fn usize_array(xs: &[usize]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(","))
}

/// Full singular-set report as deterministic JSON.
pub fn report_json(report: &SingularSetReport, config_echo: &str) -> String {
    let mut s = String::with_capacity(1 << 16);
    s.push_str("{\n");
    s.push_str(&format!(
        "  \"verdict\": {},\n",
        json_string(&report.verdict.to_string())
    ));

    s.push_str("  \"verdict_reasons\": [\n");
    for (i, r) in report.verdict_reasons.iter().enumerate() {
        s.push_str(&format!(
            "    {{\"condition\": {}, \"passed\": {}, \"detail\": {}}}{}\n",
            json_string(r.condition),
            r.passed,
            json_string(&r.detail),
            if i + 1 < report.verdict_reasons.len() { "," } else { "" }
        ));
    }
    s.push_str("  ],\n");

    s.push_str(&format!(
        "  \"extinction_time\": {},\n",
        fmt_f64(report.extinction_time)
    ));
    s.push_str(&format!(
        "  \"extinction_node\": {},\n",
        usize_array(&report.extinction_node[..])
    ));
    s.push_str(&format!(
        "  \"lipschitz_estimate\": {},\n",
        fmt_f64(report.lipschitz_estimate)
    ));
    s.push_str(&format!("  \"n_detections\": {},\n", report.points.len()));
    s.push_str(&format!("  \"unclassified\": {},\n", report.unclassified));

    s.push_str("  \"time_clusters\": [\n");
    for (i, c) in report.time_clusters.iter().enumerate() {
        s.push_str(&format!(
            "    {{\"time\": {}, \"n_members\": {}, \"members\": {}}}{}\n",
            fmt_f64(c.time),
            c.members.len(),
            usize_array(&c.members),
            if i + 1 < report.time_clusters.len() { "," } else { "" }
        ));
    }
    s.push_str("  ],\n");

    s.push_str("  \"manifolds\": [\n");
    for (i, m) in report.manifolds.iter().enumerate() {
        s.push_str(&format!(
            "    {{\"k\": {}, \"n_points\": {}, \"closed\": {}, \"max_tangency_deg\": {}, \"u_spread\": {}}}{}\n",
            m.k,
            m.members.len(),
            m.closed,
            fmt_f64(m.max_tangency_deg),
            fmt_f64(m.u_spread),
            if i + 1 < report.manifolds.len() { "," } else { "" }
        ));
    }
    s.push_str("  ],\n");
    match &report.mixed_stratum {
        Some(ks) => s.push_str(&format!("  \"mixed_stratum\": {},\n", usize_array(ks))),
        None => s.push_str("  \"mixed_stratum\": null,\n"),
    }

    s.push_str("  \"points\": [\n");
    for (i, p) in report.points.iter().enumerate() {
        let eig = p.eigenvalues();
        let k_str = match p.k() {
            Some(k) => k.to_string(),
            None => "null".into(),
        };
        let residual = match &p.stratum {
            Some(st) => fmt_f64(st.cylinder_residual),
            None => "null".into(),
        };
        s.push_str(&format!(
            "    {{\"position\": {}, \"u\": {}, \"eigenvalues\": {}, \"k\": {}, \"residual\": {}}}{}\n",
            float_array(&p.position),
            fmt_f64(p.u_value),
            float_array(&eig),
            k_str,
            residual,
            if i + 1 < report.points.len() { "," } else { "" }
        ));
    }
    s.push_str("  ],\n");

    s.push_str("  \"profiles\": {\n");
    match &report.cone_profile {
        Some(p) => s.push_str(&format!(
            "    \"cone_continuity\": {{\"radii\": {}, \"max_hessian_deviation\": {}, \"n_samples\": {}}},\n",
            float_array(&p.radii),
            float_array(&p.max_deviation),
            usize_array(&p.n_samples)
        )),
        None => s.push_str("    \"cone_continuity\": null,\n"),
    }
    match &report.alignment_profile {
        Some(p) => s.push_str(&format!(
            "    \"normal_alignment\": {{\"radii\": {}, \"max_axis_alignment\": {}, \"n_samples\": {}}},\n",
            float_array(&p.radii),
            float_array(&p.max_axis_alignment),
            usize_array(&p.n_samples)
        )),
        None => s.push_str("    \"normal_alignment\": null,\n"),
    }
    match &report.rescaled {
        Some(p) => {
            let spectra: Vec<String> = p.shape_spectrum.iter().map(|s| float_array(s)).collect();
            s.push_str(&format!(
                "    \"rescaled\": {{\"radii\": {}, \"radial_alignment\": {}, \"speed_ratio\": {}, \"shape_spectrum\": [{}], \"spectrum_deviation\": {}, \"grad_speed_ratio\": {}, \"n_samples\": {}}}\n",
                float_array(&p.radii),
                float_array(&p.radial_alignment),
                float_array(&p.speed_ratio),
                spectra.join(","),
                float_array(&p.spectrum_deviation),
                float_array(&p.grad_speed_ratio),
                usize_array(&p.n_samples)
            ));
        }
        None => s.push_str("    \"rescaled\": null\n"),
    }
    s.push_str("  },\n");

    match &report.hessian_tangent_ratio {
        Some(LipschitzOutcome::MaxRatio(r)) => {
            s.push_str(&format!("  \"hessian_tangent_ratio\": {},\n", fmt_f64(*r)))
        }
        Some(LipschitzOutcome::NoVariation) => {
            s.push_str("  \"hessian_tangent_ratio\": \"no variation\",\n")
        }
        None => s.push_str("  \"hessian_tangent_ratio\": null,\n"),
    }
    match &report.local_structure {
        Some(l) => s.push_str(&format!(
            "  \"local_structure\": {{\"local_max\": {}, \"separation\": {}}},\n",
            l.local_max, l.separation
        )),
        None => s.push_str("  \"local_structure\": null,\n"),
    }
    match &report.transverse_point {
        Some(q) => s.push_str(&format!("  \"transverse_point\": {},\n", float_array(q))),
        None => s.push_str("  \"transverse_point\": null,\n"),
    }

    s.push_str("  \"notes\": [");
    s.push_str(
        &report
            .notes
            .iter()
            .map(|n| json_string(n))
            .collect::<Vec<_>>()
            .join(", "),
    );
    s.push_str("],\n");

    let p = &report.params;
    s.push_str("  \"tolerances\": {\n");
    s.push_str(&format!(
        "    \"tau\": {},\n",
        p.tau.map_or("\"auto\"".into(), fmt_f64)
    ));
    s.push_str(&format!("    \"tol\": {},\n", fmt_f64(p.tol)));
    s.push_str(&format!(
        "    \"time_tol_frac\": {},\n",
        fmt_f64(p.time_tol_frac)
    ));
    s.push_str(&format!(
        "    \"time_tol_abs\": {},\n",
        fmt_f64(report.time_tol_abs)
    ));
    s.push_str(&format!(
        "    \"angle_tol_deg\": {},\n",
        fmt_f64(p.angle_tol_deg)
    ));
    s.push_str(&format!("    \"grad_floor\": {},\n", fmt_f64(p.grad_floor)));
    s.push_str(&format!(
        "    \"cone_aperture\": {},\n",
        fmt_f64(p.cone_aperture)
    ));
    s.push_str(&format!("    \"radii\": {},\n", float_array(&p.radii)));
    s.push_str(&format!(
        "    \"samples_per_radius\": {},\n",
        p.samples_per_radius
    ));
    s.push_str(&format!(
        "    \"epsilon_search_frac\": {},\n",
        fmt_f64(p.epsilon_search_frac)
    ));
    s.push_str(&format!("    \"seed\": {}\n", p.seed));
    s.push_str("  },\n");

    s.push_str(&format!("  \"config\": {}\n", json_string(config_echo)));
    s.push_str("}\n");
    s
}

pub fn diagnostics_csv(log: &DiagnosticsLog) -> String {
    let mut s = String::from("step,t,positive_nodes,max_v,min_v\n");
    for r in &log.rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.step,
            fmt_f64(r.t),
            r.positive_nodes,
            fmt_f64(r.max_v),
            fmt_f64(r.min_v)
        ));
    }
    s
}

/// Residual map over regular masked nodes: linear index, position, residual.
pub fn residual_csv(u: &ArrivalField, grad_floor: f64) -> String {
    let dim = u.spec.dim;
    let mut s = String::from(if dim == 2 {
        "index,x,y,residual\n"
    } else {
        "index,x,y,z,residual\n"
    });
    for (idx, r) in u.residual_map(grad_floor) {
        let p = u.spec.position(idx);
        let coords: Vec<String> = (0..dim).map(|a| fmt_f64(p[a])).collect();
        s.push_str(&format!(
            "{},{},{}\n",
            u.spec.linear(idx),
            coords.join(","),
            fmt_f64(r)
        ));
    }
    s
}

pub fn cone_profile_csv(p: &crate::analyze::ConeProfile) -> String {
    let mut s = String::from("radius,max_hessian_deviation,n_samples\n");
    for i in 0..p.radii.len() {
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(p.radii[i]),
            fmt_f64(p.max_deviation[i]),
            p.n_samples[i]
        ));
    }
    s
}

pub fn alignment_profile_csv(p: &crate::analyze::AlignmentProfile) -> String {
    let mut s = String::from("radius,max_axis_alignment,n_samples\n");
    for i in 0..p.radii.len() {
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(p.radii[i]),
            fmt_f64(p.max_axis_alignment[i]),
            p.n_samples[i]
        ));
    }
    s
}

pub fn rescaled_profile_csv(p: &crate::analyze::RescaledProfile) -> String {
    let spectrum_cols = p.shape_spectrum.first().map_or(0, |s| s.len());
    let mut header = String::from("radius,radial_alignment,speed_ratio");
    for i in 0..spectrum_cols {
        header.push_str(&format!(",spectrum_{i}"));
    }
    header.push_str(",spectrum_deviation,grad_speed_ratio,n_samples\n");
    let mut s = header;
    for i in 0..p.radii.len() {
        let mut row = vec![
            fmt_f64(p.radii[i]),
            fmt_f64(p.radial_alignment[i]),
            fmt_f64(p.speed_ratio[i]),
        ];
        for v in &p.shape_spectrum[i] {
            row.push(fmt_f64(*v));
        }
        row.push(fmt_f64(p.spectrum_deviation[i]));
        row.push(fmt_f64(p.grad_speed_ratio[i]));
        row.push(p.n_samples[i].to_string());
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// 8-bit PGM (P5) heatmap of a 2D node map. NaN renders as 0; the linear
/// ramp's min/max and the caller's comment lines go into header comments.
pub fn pgm_heatmap(
    width: usize,
    height: usize,
    values: impl Fn(usize, usize) -> f64,
    comments: &[String],
) -> Vec<u8> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in 0..height {
        for col in 0..width {
            let v = values(row, col);
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 0.0;
    }
    let mut head = String::from("P5\n");
    head.push_str(&format!("# min={} max={}\n", fmt_f64(lo), fmt_f64(hi)));
    for c in comments {
        head.push_str(&format!("# {c}\n"));
    }
    head.push_str(&format!("{width} {height}\n255\n"));
    let mut out = head.into_bytes();
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    for row in 0..height {
        for col in 0..width {
            let v = values(row, col);
            let byte = if v.is_finite() {
                (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            out.push(byte);
        }
    }
    out
}

/// Heatmap of an arrival field (2D grids only; the first axis runs down the
/// image).
pub fn arrival_heatmap(u: &ArrivalField, comments: &[String]) -> Vec<u8> {
    let (n0, n1) = (u.spec.counts[0], u.spec.counts[1]);
    pgm_heatmap(
        n1,
        n0,
        |row, col| u.values[u.spec.linear([row, col, 0])],
        comments,
    )
}

/// Heatmap of |residual| with non-evaluable nodes dark.
pub fn residual_heatmap(u: &ArrivalField, grad_floor: f64, comments: &[String]) -> Vec<u8> {
    let (n0, n1) = (u.spec.counts[0], u.spec.counts[1]);
    let mut map = vec![f64::NAN; n0 * n1];
    for (idx, r) in u.residual_map(grad_floor) {
        map[u.spec.linear(idx)] = r.abs();
    }
    pgm_heatmap(n1, n0, |row, col| map[row * n1 + col], comments)
}
