//! ASCII grid maps.
//!
//! `#` wall, `.` free, `S` start, `G` goal, any other upper-case letter is a
//! free cell carrying a marker (`U` and `L` in the load/unload corridor).
//! When no `S` is present a `U` marker doubles as the start cell.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Wall,
    Free,
    Start,
    Goal,
    Marker(char),
}

impl Cell {
    pub fn is_open(self) -> bool {
        self != Cell::Wall
    }

    fn from_char(c: char) -> Option<Cell> {
        match c {
            '#' => Some(Cell::Wall),
            '.' => Some(Cell::Free),
            'S' => Some(Cell::Start),
            'G' => Some(Cell::Goal),
            'A'..='Z' => Some(Cell::Marker(c)),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            Cell::Wall => '#',
            Cell::Free => '.',
            Cell::Start => 'S',
            Cell::Goal => 'G',
            Cell::Marker(c) => c,
        }
    }
}

/// Row/column position, row 0 at the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub row: usize,
    pub col: usize,
}

impl Pos {
    pub fn new(row: usize, col: usize) -> Self {
        Pos { row, col }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapErrorKind {
    #[error("map is empty")]
    Empty,
    #[error("row has {found} columns, expected {expected}")]
    Ragged { expected: usize, found: usize },
    #[error("unknown character {0:?}")]
    UnknownChar(char),
    #[error("no start cell (S, or U when S is absent)")]
    MissingStart,
    #[error("more than one start cell")]
    DuplicateStart,
    #[error("goal is unreachable from the start")]
    UnreachableGoal,
    #[error("free cell is unreachable from the start")]
    UnreachableCell,
}

/// Parse failure with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct MapError {
    pub kind: MapErrorKind,
    pub line: usize,
    pub column: usize,
}

impl MapError {
    fn at(kind: MapErrorKind, pos: Pos) -> Self {
        MapError {
            kind,
            line: pos.row + 1,
            column: pos.col + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
    start: Pos,
}

impl GridMap {
    pub fn parse(text: &str) -> Result<GridMap, MapError> {
        let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
        let end = lines
            .iter()
            .rposition(|l| !l.is_empty())
            .map_or(0, |i| i + 1);
        let lines = &lines[..end];
        if lines.is_empty() {
            return Err(MapError::at(MapErrorKind::Empty, Pos::new(0, 0)));
        }

        let cols = lines[0].chars().count();
        let mut cells = Vec::with_capacity(lines.len() * cols);
        let mut starts = Vec::new();
        let mut unloads = Vec::new();
        for (row, line) in lines.iter().enumerate() {
            let width = line.chars().count();
            if width != cols {
                return Err(MapError::at(
                    MapErrorKind::Ragged {
                        expected: cols,
                        found: width,
                    },
                    Pos::new(row, width.min(cols)),
                ));
            }
            for (col, ch) in line.chars().enumerate() {
                let cell = Cell::from_char(ch).ok_or_else(|| {
                    MapError::at(MapErrorKind::UnknownChar(ch), Pos::new(row, col))
                })?;
                match cell {
                    Cell::Start => starts.push(Pos::new(row, col)),
                    Cell::Marker('U') => unloads.push(Pos::new(row, col)),
                    _ => {}
                }
                cells.push(cell);
            }
        }

        let start = match (starts.as_slice(), unloads.as_slice()) {
            ([s], _) => *s,
            ([], [u]) => *u,
            ([], []) => return Err(MapError::at(MapErrorKind::MissingStart, Pos::new(0, 0))),
            ([], [_, second, ..]) | ([_, second, ..], _) => {
                return Err(MapError::at(MapErrorKind::DuplicateStart, *second))
            }
        };

        let map = GridMap {
            rows: lines.len(),
            cols,
            cells,
            start,
        };
        map.check_reachability()?;
        Ok(map)
    }

    fn check_reachability(&self) -> Result<(), MapError> {
        let reached = self.reachable_from(self.start);
        let mut first_stray = None;
        for pos in self.positions() {
            if self.cell(pos).is_open() && !reached[self.index(pos)] {
                if self.cell(pos) == Cell::Goal {
                    return Err(MapError::at(MapErrorKind::UnreachableGoal, pos));
                }
                first_stray.get_or_insert(pos);
            }
        }
        match first_stray {
            Some(pos) => Err(MapError::at(MapErrorKind::UnreachableCell, pos)),
            None => Ok(()),
        }
    }

    fn reachable_from(&self, from: Pos) -> Vec<bool> {
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::from([from]);
        seen[self.index(from)] = true;
        while let Some(p) = queue.pop_front() {
            for dir in Direction::ALL {
                if let Some(n) = self.neighbor(p, dir) {
                    if self.cell(n).is_open() && !seen[self.index(n)] {
                        seen[self.index(n)] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        seen
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn start(&self) -> Pos {
        self.start
    }

    pub fn cell(&self, pos: Pos) -> Cell {
        self.cells[self.index(pos)]
    }

    pub fn index(&self, pos: Pos) -> usize {
        pos.row * self.cols + pos.col
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| Pos::new(r, c)))
    }

    pub fn open_cells(&self) -> impl Iterator<Item = Pos> + '_ {
        self.positions().filter(|&p| self.cell(p).is_open())
    }

    pub fn find(&self, cell: Cell) -> Vec<Pos> {
        self.positions().filter(|&p| self.cell(p) == cell).collect()
    }

    /// Neighbouring position inside the grid bounds, wall or not.
    pub fn neighbor(&self, pos: Pos, dir: Direction) -> Option<Pos> {
        let (dr, dc) = dir.delta();
        let row = pos.row.checked_add_signed(dr)?;
        let col = pos.col.checked_add_signed(dc)?;
        (row < self.rows && col < self.cols).then_some(Pos::new(row, col))
    }

    pub fn is_blocked(&self, pos: Pos, dir: Direction) -> bool {
        self.neighbor(pos, dir)
            .is_none_or(|n| !self.cell(n).is_open())
    }

    /// Position after trying to move; walls and the grid border leave the
    /// agent in place.
    pub fn moved(&self, pos: Pos, dir: Direction) -> Pos {
        match self.neighbor(pos, dir) {
            Some(n) if self.cell(n).is_open() => n,
            _ => pos,
        }
    }

    /// Wall-presence bits: north 1, east 2, south 4, west 8.
    pub fn wall_signature(&self, pos: Pos) -> u8 {
        Direction::ALL
            .iter()
            .enumerate()
            .filter(|(_, &d)| self.is_blocked(pos, d))
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| self.cell(Pos::new(r, c)).to_char())
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    fn delta(self) -> (isize, isize) {
        match self {
            Direction::North => (-1, 0),
            Direction::East => (0, 1),
            Direction::South => (1, 0),
            Direction::West => (0, -1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(text: &str) -> MapError {
        GridMap::parse(text).unwrap_err()
    }

    #[test]
    fn parses_corridor() {
        let m = GridMap::parse("S.G").unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 3));
        assert_eq!(m.start(), Pos::new(0, 0));
        assert_eq!(m.find(Cell::Goal), vec![Pos::new(0, 2)]);
    }

    #[test]
    fn unload_marker_doubles_as_start() {
        let m = GridMap::parse("U..L\n").unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 4));
        assert_eq!(m.start(), Pos::new(0, 0));
        assert_eq!(m.cell(Pos::new(0, 3)), Cell::Marker('L'));
    }

    #[test]
    fn unreachable_goal() {
        let e = err("S#G");
        assert_eq!(e.kind, MapErrorKind::UnreachableGoal);
        assert_eq!((e.line, e.column), (1, 3));
    }

    #[test]
    fn ragged_rows() {
        let e = err("S..\n..\n");
        assert!(matches!(
            e.kind,
            MapErrorKind::Ragged {
                expected: 3,
                found: 2
            }
        ));
        assert_eq!(e.line, 2);
    }

    #[test]
    fn unknown_character() {
        let e = err("S.\n.x");
        assert_eq!(e.kind, MapErrorKind::UnknownChar('x'));
        assert_eq!((e.line, e.column), (2, 2));
    }

    #[test]
    fn missing_and_duplicate_start() {
        assert_eq!(err("..G").kind, MapErrorKind::MissingStart);
        let e = err("S.S");
        assert_eq!(e.kind, MapErrorKind::DuplicateStart);
        assert_eq!(e.column, 3);
        assert_eq!(err("").kind, MapErrorKind::Empty);
    }

    #[test]
    fn stray_free_cell() {
        assert_eq!(err("S.#.").kind, MapErrorKind::UnreachableCell);
    }

    #[test]
    fn crlf_and_trailing_blank_lines() {
        let m = GridMap::parse("S.\r\n.G\r\n\n").unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
    }

    #[test]
    fn signatures_treat_border_as_wall() {
        let m = GridMap::parse("U..L").unwrap();
        // north, south, west
        assert_eq!(m.wall_signature(Pos::new(0, 0)), 1 | 4 | 8);
        assert_eq!(m.wall_signature(Pos::new(0, 1)), 1 | 4);
        assert_eq!(m.wall_signature(Pos::new(0, 3)), 1 | 2 | 4);
        assert_eq!(m.moved(Pos::new(0, 0), Direction::West), Pos::new(0, 0));
        assert_eq!(m.moved(Pos::new(0, 0), Direction::East), Pos::new(0, 1));
    }

    #[test]
    fn display_round_trips() {
        let text = "#####\n#S.G#\n#####\n";
        assert_eq!(GridMap::parse(text).unwrap().to_string(), text);
    }
}
