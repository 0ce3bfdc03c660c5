//! CSV and SVG export of portraits and basin maps.
//!
//! SVG conventions: `r_w` on the horizontal axis, `r_m` vertical, red circles
//! for stable equilibria and black circles for the rest.

use std::fmt::Write as _;
use std::io;

use super::{BasinMap, PhasePortrait};
use crate::equilibrium::EquilibriumPoint;
use crate::error::Result;
use crate::numfmt::fmt_f64;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 48.0;
const PLOT: f64 = SIZE - 2.0 * MARGIN;
const MAX_ARROWS: usize = 24;
const PALETTE: [&str; 10] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
];

fn px(r_w: f64) -> f64 {
    MARGIN + r_w * PLOT
}

fn py(r_m: f64) -> f64 {
    MARGIN + (1.0 - r_m) * PLOT
}

pub fn write_portrait_csv<W: io::Write>(portrait: &PhasePortrait, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["r_w", "r_m", "v_w", "v_m"])?;
    for s in &portrait.grid {
        w.write_record([fmt_f64(s.comp.r_w), fmt_f64(s.comp.r_m), fmt_f64(s.velocity.v_w), fmt_f64(s.velocity.v_m)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_basins_csv<W: io::Write>(map: &BasinMap, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["r_w", "r_m", "basin_id"])?;
    for (k, label) in map.labels.iter().enumerate() {
        let c = map.cell(k);
        let id = label.map_or("-1".to_string(), |i| i.to_string());
        w.write_record([fmt_f64(c.r_w), fmt_f64(c.r_m), id])?;
    }
    w.flush()?;
    Ok(())
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<title>{title}</title>");
    let _ = writeln!(
        out,
        r##"<defs><marker id="head" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="5" markerHeight="5" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#555"/></marker></defs>"##
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#);
}

fn frame(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"#, px(v), SIZE - MARGIN + 18.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, MARGIN - 6.0, py(v) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">r_w</text>"#, SIZE / 2.0, SIZE - 10.0);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">r_m</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
}

fn markers(out: &mut String, equilibria: &[EquilibriumPoint]) {
    for e in equilibria {
        let fill = if e.is_stable() { "red" } else { "black" };
        let _ = writeln!(
            out,
            r#"<circle class="equilibrium" cx="{:.2}" cy="{:.2}" r="5" fill="{fill}" stroke="white" stroke-width="1"/>"#,
            px(e.comp.r_w),
            py(e.comp.r_m)
        );
    }
}

fn polylines(out: &mut String, lines: &[Vec<[f64; 2]>], color: &str, class: &str) {
    for line in lines {
        let pts: Vec<String> = line.iter().map(|p| format!("{:.2},{:.2}", px(p[0]), py(p[1]))).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }
}

/// Vector field arrows (direction only), nullclines and equilibria.
pub fn portrait_svg(portrait: &PhasePortrait) -> String {
    let mut out = String::new();
    header(&mut out, "Phase portrait");
    frame(&mut out);
    let n = portrait.n;
    let stride = n.div_ceil(MAX_ARROWS).max(1);
    let len = 0.4 * PLOT / (n as f64 / stride as f64);
    for i in (0..n).step_by(stride) {
        for j in (0..n).step_by(stride) {
            let s = &portrait.grid[i * n + j];
            let (vw, vm) = (s.velocity.v_w, s.velocity.v_m);
            let (dw, dm) = if vw.is_infinite() || vm.is_infinite() {
                (if vw.is_infinite() { vw.signum() } else { 0.0 }, if vm.is_infinite() { vm.signum() } else { 0.0 })
            } else {
                (vw, vm)
            };
            let norm = dw.hypot(dm);
            if !(norm > 0.0) {
                continue;
            }
            let (x0, y0) = (px(s.comp.r_w), py(s.comp.r_m));
            let (x1, y1) = (x0 + len * dw / norm, y0 - len * dm / norm);
            let _ = writeln!(
                out,
                r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#555" stroke-width="1" marker-end="url(#head)"/>"##
            );
        }
    }
    polylines(&mut out, &portrait.nullcline_w, "#1f77b4", "nullcline-w");
    polylines(&mut out, &portrait.nullcline_m, "#2ca02c", "nullcline-m");
    markers(&mut out, &portrait.equilibria);
    out.push_str("</svg>\n");
    out
}

/// Cells colored by basin label (white when unresolved) with equilibria on top.
pub fn basins_svg(map: &BasinMap) -> String {
    let mut out = String::new();
    header(&mut out, "Basins of attraction");
    let n = map.resolution;
    let cell = PLOT / n as f64;
    for (k, label) in map.labels.iter().enumerate() {
        let c = map.cell(k);
        let fill = label.map_or("white", |i| PALETTE[i % PALETTE.len()]);
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            px(c.r_w) - 0.5 * cell,
            py(c.r_m) - 0.5 * cell,
            cell,
            cell
        );
    }
    frame(&mut out);
    markers(&mut out, &map.equilibria);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::phase_portrait;
    use crate::model::ModelParams;

    #[test]
    fn csv_and_svg_shapes() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let pp = phase_portrait(&p, 16).unwrap();
        let mut buf = Vec::new();
        write_portrait_csv(&pp, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 257);
        assert!(text.starts_with("r_w,r_m,v_w,v_m\n"));
        let svg = portrait_svg(&pp);
        assert_eq!(svg.matches(r#"fill="red""#).count(), 1);
        assert!(svg.contains("nullcline-w") && svg.contains("nullcline-m"));
        assert_eq!(svg, portrait_svg(&pp));
    }
}
