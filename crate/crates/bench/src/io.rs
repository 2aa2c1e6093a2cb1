//! Benchmark map, scenario and solution file formats.

use std::fmt::Write as _;
use std::sync::Arc;

use lacam_core::{Configuration, GridMap, Instance, InstanceError, Solution, Vertex};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("scenario has {available} entries, {requested} requested")]
    TooFewEntries { available: usize, requested: usize },
    #[error("invalid instance: {0}")]
    Instance(#[from] InstanceError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

fn is_passable(c: char) -> Option<bool> {
    match c {
        '.' | 'G' => Some(true),
        '@' | 'T' | 'O' => Some(false),
        _ => None,
    }
}

/// Reads a grid in the benchmark `.map` format.
pub fn parse_map(text: &str) -> Result<GridMap, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (mut width, mut height) = (None, None);
    loop {
        let (no, line) = lines.next().ok_or_else(|| syntax(0, "missing `map` line"))?;
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next()) {
            (Some("type"), _) => {}
            (Some("height"), Some(v)) => height = Some(v.parse::<usize>().map_err(|_| syntax(no, "bad height"))?),
            (Some("width"), Some(v)) => width = Some(v.parse::<usize>().map_err(|_| syntax(no, "bad width"))?),
            (Some("map"), None) => break,
            _ => return Err(syntax(no, format!("unexpected header line `{line}`"))),
        }
    }
    let width = width.ok_or_else(|| syntax(0, "missing width"))?;
    let height = height.ok_or_else(|| syntax(0, "missing height"))?;

    let mut passable = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (no, line) in lines {
        if rows == height {
            if line.trim().is_empty() {
                continue;
            }
            return Err(syntax(no, "more rows than declared height"));
        }
        let before = passable.len();
        for c in line.chars() {
            passable.push(is_passable(c).ok_or_else(|| syntax(no, format!("unknown glyph `{c}`")))?);
        }
        if passable.len() - before != width {
            return Err(syntax(no, format!("row has {} cells, expected {width}", passable.len() - before)));
        }
        rows += 1;
    }
    if rows != height {
        return Err(syntax(0, format!("{rows} rows, expected {height}")));
    }
    GridMap::new(width, height, &passable).map_err(|e| syntax(0, e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub bucket: u32,
    pub map_name: String,
    pub width: usize,
    pub height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub distance: f64,
}

/// Reads every entry of a `.scen` file.
pub fn parse_scen_entries(text: &str) -> Result<Vec<ScenarioEntry>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if no == 1 && line.starts_with("version") {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 9 {
            return Err(syntax(no, format!("expected 9 tab-separated fields, got {}", f.len())));
        }
        let int = |s: &str| s.trim().parse::<usize>().map_err(|_| syntax(no, format!("bad integer `{s}`")));
        out.push(ScenarioEntry {
            bucket: int(f[0])? as u32,
            map_name: f[1].to_string(),
            width: int(f[2])?,
            height: int(f[3])?,
            start: (int(f[4])?, int(f[5])?),
            goal: (int(f[6])?, int(f[7])?),
            distance: f[8].trim().parse().map_err(|_| syntax(no, "bad distance"))?,
        });
    }
    Ok(out)
}

/// First `n` scenario entries as an instance on `map`.
pub fn parse_scen(text: &str, map: Arc<GridMap>, n: usize) -> Result<Instance, ParseError> {
    let entries = parse_scen_entries(text)?;
    if n == 0 || entries.len() < n {
        return Err(ParseError::TooFewEntries { available: entries.len(), requested: n });
    }
    let cell = |e: &ScenarioEntry, (x, y): (usize, usize), what: &str, no: usize| {
        if x >= e.width || y >= e.height {
            return Err(syntax(no, format!("{what} ({x},{y}) outside {}x{}", e.width, e.height)));
        }
        map.vertex_at(x, y).ok_or_else(|| syntax(no, format!("{what} ({x},{y}) is blocked")))
    };
    let mut starts = Vec::with_capacity(n);
    let mut goals = Vec::with_capacity(n);
    for (i, e) in entries[..n].iter().enumerate() {
        // entry i sits on line i + 2 after the version header
        let no = i + 2;
        starts.push(cell(e, e.start, "start", no)?);
        goals.push(cell(e, e.goal, "goal", no)?);
    }
    Ok(Instance::new(map, starts, goals)?)
}

/// One line per timestep: `(x,y),(x,y),...`.
pub fn format_solution(solution: &Solution, map: &GridMap) -> String {
    let mut out = String::new();
    for config in solution.iter() {
        for (i, &v) in config.iter().enumerate() {
            let (x, y) = map.coords(v);
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "({x},{y})");
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`format_solution`]; also accepts a `t:` prefix and a trailing comma.
pub fn parse_solution(text: &str, map: &GridMap) -> Result<Solution, ParseError> {
    let mut configs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let mut line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some((head, rest)) = line.split_once(':') {
            if head.trim().chars().all(|c| c.is_ascii_digit()) {
                line = rest.trim();
            }
        }
        let mut config = Vec::new();
        let mut rest = line;
        while let Some(open) = rest.find('(') {
            let close = rest[open..].find(')').ok_or_else(|| syntax(no, "unclosed `(`"))? + open;
            let (x, y) = rest[open + 1..close]
                .split_once(',')
                .ok_or_else(|| syntax(no, "expected `(x,y)`"))?;
            let x: usize = x.trim().parse().map_err(|_| syntax(no, "bad x"))?;
            let y: usize = y.trim().parse().map_err(|_| syntax(no, "bad y"))?;
            let v: Vertex = map.vertex_at(x, y).ok_or_else(|| syntax(no, format!("({x},{y}) is not a vertex")))?;
            config.push(v);
            rest = &rest[close + 1..];
        }
        if config.is_empty() {
            return Err(syntax(no, "no cells on line"));
        }
        configs.push(Configuration(config));
    }
    Ok(Solution(configs))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "type octile\nheight 2\nwidth 3\nmap\n..@\nT.G\n";

    #[test]
    fn parses_glyphs() {
        let m = parse_map(TINY).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert!(m.vertex_at(2, 0).is_none());
        assert!(m.vertex_at(0, 1).is_none());
        assert!(m.vertex_at(2, 1).is_some());
    }

    #[test]
    fn two_by_two_open_grid() {
        let m = parse_map("type octile\nheight 2\nwidth 2\nmap\n..\n..\n").unwrap();
        assert_eq!((m.num_vertices(), m.num_edges()), (4, 4));
    }

    #[test]
    fn short_row_reports_its_line() {
        let err = parse_map("type octile\nheight 2\nwidth 3\nmap\n...\n..\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 6, .. }), "{err}");
    }

    #[test]
    fn unknown_glyph_is_rejected() {
        let err = parse_map("type octile\nheight 1\nwidth 2\nmap\n.S\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 5, .. }));
    }

    #[test]
    fn missing_rows_are_rejected() {
        assert!(parse_map("type octile\nheight 3\nwidth 1\nmap\n.\n.\n").is_err());
    }

    fn scen(lines: &[(usize, usize, usize, usize)]) -> String {
        let mut s = String::from("version 1\n");
        for &(sx, sy, gx, gy) in lines {
            s += &format!("0\ttiny.map\t3\t2\t{sx}\t{sy}\t{gx}\t{gy}\t1.0\n");
        }
        s
    }

    #[test]
    fn scenario_takes_first_entries() {
        let map = Arc::new(parse_map(TINY).unwrap());
        let text = scen(&[(0, 0, 1, 1), (1, 0, 2, 1), (1, 1, 0, 0)]);
        let inst = parse_scen(&text, map.clone(), 1).unwrap();
        assert_eq!(inst.num_agents(), 1);
        assert_eq!(inst.starts()[0], map.vertex_at(0, 0).unwrap());
        assert_eq!(parse_scen(&text, map.clone(), 2).unwrap().num_agents(), 2);
    }

    #[test]
    fn scenario_too_short() {
        let map = Arc::new(parse_map(TINY).unwrap());
        let err = parse_scen(&scen(&[(0, 0, 1, 1)]), map, 5).unwrap_err();
        assert_eq!(err, ParseError::TooFewEntries { available: 1, requested: 5 });
        assert!(err.to_string().contains('1'));
    }

    #[test]
    fn scenario_duplicate_start() {
        let map = Arc::new(parse_map(TINY).unwrap());
        let err = parse_scen(&scen(&[(0, 0, 1, 1), (0, 0, 2, 1)]), map, 2).unwrap_err();
        assert!(matches!(err, ParseError::Instance(InstanceError::DuplicateStart { .. })));
    }

    #[test]
    fn scenario_blocked_start() {
        let map = Arc::new(parse_map(TINY).unwrap());
        let err = parse_scen(&scen(&[(2, 0, 1, 1)]), map, 1).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn solution_text_round_trips() {
        let map = parse_map(TINY).unwrap();
        let v = |x, y| map.vertex_at(x, y).unwrap();
        let sol = Solution(vec![
            Configuration(vec![v(0, 0), v(1, 1)]),
            Configuration(vec![v(1, 0), v(2, 1)]),
        ]);
        let text = format_solution(&sol, &map);
        assert_eq!(text, "(0,0),(1,1)\n(1,0),(2,1)\n");
        assert_eq!(parse_solution(&text, &map).unwrap(), sol);
        assert_eq!(parse_solution("0:(0,0),(1,1),\n1:(1,0),(2,1),\n", &map).unwrap(), sol);
    }
}
