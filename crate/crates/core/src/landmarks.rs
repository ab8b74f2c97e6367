//! The 68-point facial landmark set and its text formats.
//!
//! Two formats are read:
//!
//! * plain: one `x y` pair per line (commas are accepted as separators);
//! * pts: `version: 1`, `n_points: 68`, then the pairs between `{` and `}`.
//!
//! Points follow the common 68-point annotation order: jaw 0-16, brows
//! 17-26, nose 27-35, eyes 36-47, outer lip 48-59, inner lip 60-67.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const NUM_LANDMARKS: usize = 68;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkSet {
    points: Vec<Point>,
}

impl LandmarkSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() != NUM_LANDMARKS {
            return Err(Error::WrongPointCount(points.len()));
        }
        if let Some(i) = points.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::NonFiniteCoordinate(i));
        }
        Ok(LandmarkSet { points })
    }

    /// Fails when all points are collinear, i.e. the hull has zero area.
    pub fn check_hull(&self) -> Result<()> {
        let a = self.points[0];
        let spread = self
            .points
            .iter()
            .flat_map(|b| self.points.iter().map(move |c| (b, c)))
            .map(|(b, c)| ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)).abs())
            .fold(0.0, f64::max);
        if spread == 0.0 {
            Err(Error::DegenerateLandmarks)
        } else {
            Ok(())
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, i: usize) -> Option<Point> {
        self.points.get(i).copied()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> LandmarkSet {
        LandmarkSet {
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }

    pub fn to_pts_string(&self) -> String {
        let mut out = format!("version: 1\nn_points: {}\n{{\n", self.points.len());
        for p in &self.points {
            let _ = writeln!(out, "{} {}", p.x, p.y);
        }
        out.push_str("}\n");
        out
    }

    pub fn to_plain_string(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(out, "{} {}", p.x, p.y);
        }
        out
    }
}

pub fn parse_landmarks(path: impl AsRef<Path>) -> Result<LandmarkSet> {
    let path = path.as_ref();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::FileNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    parse_landmarks_str(&text)
}

pub fn parse_landmarks_str(text: &str) -> Result<LandmarkSet> {
    if text.contains('{') {
        parse_pts(text)
    } else {
        let mut points = Vec::with_capacity(NUM_LANDMARKS);
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            points.push(parse_pair(n + 1, line)?);
        }
        LandmarkSet::new(points)
    }
}

fn parse_pts(text: &str) -> Result<LandmarkSet> {
    let mut declared = None;
    let mut points = Vec::with_capacity(NUM_LANDMARKS);
    let mut inside = false;
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !inside {
            if trimmed == "{" {
                inside = true;
            } else if let Some(rest) = trimmed.strip_prefix("n_points:") {
                let count = rest.trim().parse::<usize>().map_err(|_| Error::MalformedLine {
                    line: n + 1,
                    text: line.to_string(),
                })?;
                declared = Some(count);
            } else if !trimmed.starts_with("version:") {
                return Err(Error::MalformedLine {
                    line: n + 1,
                    text: line.to_string(),
                });
            }
        } else if trimmed == "}" {
            inside = false;
        } else {
            points.push(parse_pair(n + 1, line)?);
        }
    }
    if let Some(count) = declared {
        if count != points.len() {
            return Err(Error::WrongPointCount(count));
        }
    }
    LandmarkSet::new(points)
}

fn parse_pair(line: usize, text: &str) -> Result<Point> {
    let malformed = || Error::MalformedLine {
        line,
        text: text.to_string(),
    };
    let mut fields = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty());
    let x = fields.next().ok_or_else(malformed)?;
    let y = fields.next().ok_or_else(malformed)?;
    if fields.next().is_some() {
        return Err(malformed());
    }
    let x = x.parse::<f64>().map_err(|_| malformed())?;
    let y = y.parse::<f64>().map_err(|_| malformed())?;
    Ok(Point::new(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagonal_plain(n: usize) -> String {
        (0..n).map(|i| format!("{i} {i}\n")).collect()
    }

    fn zigzag() -> Vec<Point> {
        (0..68)
            .map(|i| Point::new(i as f64 * 1.5, (i % 7) as f64 * 2.25 + 10.0))
            .collect()
    }

    #[test]
    fn plain_identity_points() {
        let set = parse_landmarks_str(&diagonal_plain(68)).unwrap();
        for k in 0..68 {
            assert_eq!(set.get(k), Some(Point::new(k as f64, k as f64)));
        }
        // parses fine, but cannot anchor regions
        assert!(matches!(set.check_hull(), Err(Error::DegenerateLandmarks)));
        assert!(LandmarkSet::new(zigzag()).unwrap().check_hull().is_ok());
    }

    #[test]
    fn wrong_count() {
        assert!(matches!(
            parse_landmarks_str(&diagonal_plain(67)),
            Err(Error::WrongPointCount(67))
        ));
    }

    #[test]
    fn pts_matches_plain() {
        let set = LandmarkSet::new(zigzag()).unwrap();
        let from_pts = parse_landmarks_str(&set.to_pts_string()).unwrap();
        let from_plain = parse_landmarks_str(&set.to_plain_string()).unwrap();
        assert_eq!(from_pts, from_plain);
        assert_eq!(from_pts, set);
    }

    #[test]
    fn pts_declared_count_must_match() {
        let set = LandmarkSet::new(zigzag()).unwrap();
        let text = set.to_pts_string().replace("n_points: 68", "n_points: 70");
        assert!(matches!(parse_landmarks_str(&text), Err(Error::WrongPointCount(70))));
    }

    #[test]
    fn malformed_and_nonfinite() {
        let mut text = diagonal_plain(67);
        text.push_str("1.0 abc\n");
        assert!(matches!(
            parse_landmarks_str(&text),
            Err(Error::MalformedLine { line: 68, .. })
        ));
        let mut text = diagonal_plain(67);
        text.push_str("inf 2\n");
        assert!(matches!(
            parse_landmarks_str(&text),
            Err(Error::NonFiniteCoordinate(67))
        ));
        assert!(matches!(
            parse_landmarks_str("1 2 3\n"),
            Err(Error::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn comma_separated_accepted() {
        let text: String = zigzag().iter().map(|p| format!("{},{}\n", p.x, p.y)).collect();
        assert_eq!(parse_landmarks_str(&text).unwrap().points(), zigzag().as_slice());
    }
}
