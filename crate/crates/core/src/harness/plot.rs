//! Log-log scatter plots rendered directly to SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::sweep::SweepRecord;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotStyle {
    /// Two panels split by chain length, one series per total time.
    Fig1,
    /// One series per truncation count, digitized vs continuous.
    Fig2,
    /// One series per truncation count, digitized vs adiabatic.
    Fig3,
    /// One series per (L, T, truncation) with a generic palette.
    Auto,
}

impl FromStr for PlotStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(PlotStyle::Fig1),
            "fig2" => Ok(PlotStyle::Fig2),
            "fig3" => Ok(PlotStyle::Fig3),
            "auto" => Ok(PlotStyle::Auto),
            other => Err(Error::config("style", format!("unknown plot style `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marker {
    Circle,
    Triangle,
    Square,
    Diamond,
    Asterisk,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Look {
    color: &'static str,
    marker: Marker,
}

const AUTO_PALETTE: [Look; 6] = [
    Look { color: "#d62728", marker: Marker::Circle },
    Look { color: "#2ca02c", marker: Marker::Triangle },
    Look { color: "#1f77b4", marker: Marker::Square },
    Look { color: "#e6b800", marker: Marker::Diamond },
    Look { color: "#d62fd6", marker: Marker::Asterisk },
    Look { color: "#555555", marker: Marker::Circle },
];

fn time_look(t: f64, fallback: usize) -> Look {
    if t == 1.0 {
        Look { color: "red", marker: Marker::Circle }
    } else if t == 5.0 {
        Look { color: "green", marker: Marker::Triangle }
    } else if t == 10.0 {
        Look { color: "blue", marker: Marker::Square }
    } else {
        AUTO_PALETTE[fallback % AUTO_PALETTE.len()]
    }
}

fn truncation_look(k: usize, fallback: usize) -> Look {
    match k {
        0 => Look { color: "red", marker: Marker::Circle },
        10 => Look { color: "green", marker: Marker::Triangle },
        20 => Look { color: "blue", marker: Marker::Square },
        30 => Look { color: "#e6c200", marker: Marker::Diamond },
        40 => Look { color: "magenta", marker: Marker::Asterisk },
        _ => AUTO_PALETTE[fallback % AUTO_PALETTE.len()],
    }
}

struct Series {
    label: String,
    look: Look,
    points: Vec<(f64, f64)>,
}

struct Panel {
    title: String,
    x_range: Option<(f64, f64)>,
    series: Vec<Series>,
}

const WIDTH: f64 = 620.0;
const PANEL_HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 56.0;

/// Log-log mapping from data to pixels for one panel.
#[derive(Clone, Copy, Debug)]
pub struct Axes {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub origin: (f64, f64),
    pub size: (f64, f64),
}

impl Axes {
    pub fn project(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x.ln() - self.x.0.ln()) / (self.x.1.ln() - self.x.0.ln());
        let fy = (y.ln() - self.y.0.ln()) / (self.y.1.ln() - self.y.0.ln());
        (self.origin.0 + fx * self.size.0, self.origin.1 + (1.0 - fy) * self.size.1)
    }
}

fn series_by<K: Ord + Clone>(
    records: &[&SweepRecord],
    key: impl Fn(&SweepRecord) -> K,
    label: impl Fn(&K) -> String,
    look: impl Fn(&K, usize) -> Look,
) -> Vec<Series> {
    let mut groups: BTreeMap<K, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        if let Some(e) = r.infidelity.filter(|&e| e > 0.0) {
            groups.entry(key(r)).or_default().push((r.slices as f64, e));
        }
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(i, (k, mut pts))| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                label: label(&k),
                look: look(&k, i),
                points: pts,
            }
        })
        .collect()
}

/// Total-order wrapper so f64 keys can group series.
#[derive(Clone, Copy, Debug)]
struct Key(f64);
impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o).is_eq()
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

fn panels(records: &[SweepRecord], style: PlotStyle) -> Vec<Panel> {
    let all: Vec<&SweepRecord> = records.iter().collect();
    match style {
        PlotStyle::Fig1 => {
            let mut by_l: BTreeMap<usize, Vec<&SweepRecord>> = BTreeMap::new();
            for r in &all {
                by_l.entry(r.sites).or_default().push(r);
            }
            by_l.into_iter()
                .enumerate()
                .map(|(i, (l, rs))| Panel {
                    title: format!("L = {l}"),
                    x_range: Some(if i == 0 { (20.0, 200.0) } else { (50.0, 300.0) }),
                    series: series_by(&rs, |r| Key(r.total_time), |k| format!("T = {}", k.0), |k, i| time_look(k.0, i)),
                })
                .collect()
        }
        PlotStyle::Fig2 | PlotStyle::Fig3 => {
            let title = if style == PlotStyle::Fig2 {
                "digitized vs continuous"
            } else {
                "digitized vs adiabatic"
            };
            vec![Panel {
                title: title.to_string(),
                x_range: Some((20.0, 200.0)),
                series: series_by(&all, |r| r.truncation, |k| format!("truncated {k}"), |k, i| truncation_look(*k, i)),
            }]
        }
        PlotStyle::Auto => vec![Panel {
            title: String::new(),
            x_range: None,
            series: series_by(
                &all,
                |r| (r.sites, Key(r.total_time), r.truncation),
                |k| format!("L={} T={} tr={}", k.0, k.1 .0, k.2),
                |_, i| AUTO_PALETTE[i % AUTO_PALETTE.len()],
            ),
        }],
    }
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut decade = 10f64.powf(lo.log10().floor());
    while decade <= hi * 1.0000001 {
        for m in [1.0, 2.0, 5.0] {
            let v = m * decade;
            if v >= lo * 0.9999999 && v <= hi * 1.0000001 {
                out.push(v);
            }
        }
        decade *= 10.0;
    }
    out
}

fn marker_svg(m: Marker, color: &str) -> String {
    match m {
        Marker::Circle => format!(r#"<circle r="4" fill="none" stroke="{color}" stroke-width="1.5"/>"#),
        Marker::Triangle => format!(r#"<polygon points="0,-5 4.5,3.5 -4.5,3.5" fill="none" stroke="{color}" stroke-width="1.5"/>"#),
        Marker::Square => format!(r#"<rect x="-4" y="-4" width="8" height="8" fill="none" stroke="{color}" stroke-width="1.5"/>"#),
        Marker::Diamond => format!(r#"<polygon points="0,-5 5,0 0,5 -5,0" fill="none" stroke="{color}" stroke-width="1.5"/>"#),
        Marker::Asterisk => format!(
            r#"<path d="M0,-5V5M-4.3,-2.5L4.3,2.5M-4.3,2.5L4.3,-2.5" stroke="{color}" stroke-width="1.5"/>"#
        ),
    }
}

fn render_panel(svg: &mut String, panel: &Panel, index: usize) -> Result<()> {
    let pts: Vec<(f64, f64)> = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, _)| panel.x_range.is_none_or(|(lo, hi)| *x >= lo && *x <= hi))
        .collect();
    if pts.is_empty() {
        return Err(Error::Plot(format!("panel `{}` has no positive data", panel.title)));
    }
    let (xmin, xmax) = panel.x_range.unwrap_or_else(|| {
        let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.0).fold(0.0, f64::max);
        if hi > lo { (lo, hi) } else { (lo / 2.0, hi * 2.0) }
    });
    let ylo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let yhi = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let y0 = 10f64.powf(ylo.log10().floor());
    let mut y1 = 10f64.powf(yhi.log10().ceil());
    if y1 <= y0 {
        y1 = y0 * 10.0;
    }
    let top = index as f64 * PANEL_HEIGHT + TOP;
    let axes = Axes {
        x: (xmin, xmax),
        y: (y0, y1),
        origin: (LEFT, top),
        size: (WIDTH - LEFT - RIGHT, PANEL_HEIGHT - TOP - BOTTOM),
    };
    let (w, h) = axes.size;
    let clip = format!("clip{index}");
    writeln!(svg, r#"<g class="panel">"#).unwrap();
    writeln!(svg, r#"<clipPath id="{clip}"><rect x="{LEFT}" y="{top}" width="{w}" height="{h}"/></clipPath>"#).unwrap();
    writeln!(svg, r#"<rect x="{LEFT}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>"#).unwrap();
    if !panel.title.is_empty() {
        writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#, LEFT + w / 2.0, top - 12.0, panel.title).unwrap();
    }
    for x in nice_ticks(xmin, xmax) {
        let (px, _) = axes.project(x, y0);
        writeln!(svg, r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="12">{x}</text>"#, top + h, top + h - 6.0, top + h + 18.0).unwrap();
    }
    let mut d = y0;
    while d <= y1 * 1.0000001 {
        let (_, py) = axes.project(xmin, d);
        writeln!(svg, r#"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">1e{}</text>"#, LEFT + 6.0, LEFT - 6.0, py + 4.0, d.log10().round()).unwrap();
        d *= 10.0;
    }
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">M</text>"#, LEFT + w / 2.0, top + h + 40.0).unwrap();
    writeln!(svg, r#"<text x="20" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 20 {})">infidelity</text>"#, top + h / 2.0, top + h / 2.0).unwrap();

    // Guides anchored at the first plotted point of the first series.
    let anchor = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied().find(|(x, _)| *x >= xmin && *x <= xmax))
        .next()
        .expect("non-empty panel");
    for (slope, dash, class) in [(-2.0, "", "guide slope-2"), (-1.0, r#" stroke-dasharray="6,4""#, "guide slope-1")] {
        let at = |x: f64| anchor.1 * (x / anchor.0).powf(slope);
        let (x1, y1p) = axes.project(xmin, at(xmin));
        let (x2, y2p) = axes.project(xmax, at(xmax));
        writeln!(svg, r#"<line class="{class}" x1="{x1:.3}" y1="{y1p:.3}" x2="{x2:.3}" y2="{y2p:.3}" stroke="black"{dash} clip-path="url(#{clip})"/>"#).unwrap();
    }

    for (i, s) in panel.series.iter().enumerate() {
        let shape = marker_svg(s.look.marker, s.look.color);
        for &(x, y) in s.points.iter().filter(|(x, _)| *x >= xmin && *x <= xmax) {
            let (px, py) = axes.project(x, y);
            writeln!(svg, r#"<g class="point" transform="translate({px:.3},{py:.3})">{shape}</g>"#).unwrap();
        }
        let ly = top + 16.0 + 20.0 * i as f64;
        let lx = LEFT + w + 18.0;
        writeln!(svg, r#"<g transform="translate({lx},{ly})">{shape}</g><text x="{}" y="{}" font-size="12">{}</text>"#, lx + 12.0, ly + 4.0, s.label).unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    Ok(())
}

/// Renders `records` as an SVG document.
pub fn emit_plot(records: &[SweepRecord], style: PlotStyle) -> Result<String> {
    let panels = panels(records, style);
    if panels.is_empty() || panels.iter().all(|p| p.series.is_empty()) {
        return Err(Error::Plot("no plottable records".into()));
    }
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut svg = String::new();
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#).unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut svg, p, i)?;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Engine;

    fn rec(l: usize, t: f64, tr: usize, m: usize, e: f64) -> SweepRecord {
        SweepRecord {
            engine: Engine::Fermion,
            sites: l,
            total_time: t,
            slices: m,
            truncation: tr,
            infidelity: Some(e),
            bound_total: None,
            wall_time: 0.0,
            error: None,
        }
    }

    fn attr(tag: &str, name: &str) -> f64 {
        let start = tag.find(&format!(" {name}=\"")).unwrap() + name.len() + 3;
        let end = start + tag[start..].find('"').unwrap();
        tag[start..end].parse().unwrap()
    }

    #[test]
    fn power_law_points_sit_on_the_guide() {
        let records: Vec<_> = [20, 27, 36, 50, 70, 100, 140, 200]
            .iter()
            .map(|&m| rec(50, 1.0, 0, m, 0.3 * (m as f64).powi(-2)))
            .collect();
        let svg = emit_plot(&records, PlotStyle::Fig2).unwrap();
        let guide = svg.lines().find(|l| l.contains("slope-2")).unwrap();
        let (x1, y1, x2, y2) = (attr(guide, "x1"), attr(guide, "y1"), attr(guide, "x2"), attr(guide, "y2"));
        let mut count = 0;
        for line in svg.lines().filter(|l| l.contains(r#"class="point""#)) {
            let inner = &line[line.find("translate(").unwrap() + 10..];
            let inner = &inner[..inner.find(')').unwrap()];
            let (px, py) = inner.split_once(',').unwrap();
            let (px, py): (f64, f64) = (px.parse().unwrap(), py.parse().unwrap());
            let dist = ((y2 - y1) * px - (x2 - x1) * py + x2 * y1 - y2 * x1).abs() / (x2 - x1).hypot(y2 - y1);
            assert!(dist < 1.0, "point ({px}, {py}) is {dist} px off the guide");
            count += 1;
        }
        assert_eq!(count, records.len());
    }

    #[test]
    fn fig1_has_two_panels_and_legend_colors() {
        let mut records = Vec::new();
        for (l, ms) in [(50, [20, 60, 200]), (100, [50, 120, 300])] {
            for t in [1.0, 5.0, 10.0] {
                records.extend(ms.iter().map(|&m| rec(l, t, 0, m, 1.0 / m as f64)));
            }
        }
        let svg = emit_plot(&records, PlotStyle::Fig1).unwrap();
        assert_eq!(svg.matches(r#"<g class="panel">"#).count(), 2);
        assert!(svg.contains("L = 50") && svg.contains("L = 100"));
        assert!(svg.contains(r#"<circle r="4" fill="none" stroke="red""#));
        assert!(svg.contains(r#"stroke="green""#) && svg.contains(r#"stroke="blue""#));
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(emit_plot(&[], PlotStyle::Auto), Err(Error::Plot(_))));
        assert!("fig9".parse::<PlotStyle>().is_err());
    }
}
