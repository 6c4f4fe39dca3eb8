//! Ground truth from expert centre-point annotations: one label per
//! segmented region, painted into label masks under several class schemes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::imaging::{Grid, RegionMap};
use crate::NUM_CLASSES;

/// An expert's mark at the centre of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnotationPoint {
    pub x: usize,
    pub y: usize,
    pub class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RegionLabel {
    Class(usize),
    Overlapping,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ClassScheme {
    /// Normal (0) vs abnormal (1); a label space for classifiers, no mask
    /// encoding.
    Two,
    Five,
    Nine,
    Eleven,
}

const FIVE_NAMES: [&str; 5] = ["background", "normal", "abnormal", "overlapping", "unknown"];
const NINE_NAMES: [&str; 9] = [
    "background",
    "normal",
    "spherocyte",
    "stomatocyte",
    "target",
    "ovalocyte",
    "other_abnormal",
    "overlapping",
    "unknown",
];

impl ClassScheme {
    pub const ALL: [ClassScheme; 4] = [
        ClassScheme::Two,
        ClassScheme::Five,
        ClassScheme::Nine,
        ClassScheme::Eleven,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassScheme::Two => "two",
            ClassScheme::Five => "five",
            ClassScheme::Nine => "nine",
            ClassScheme::Eleven => "eleven",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    /// Number of distinct ids, background included where the scheme has one.
    pub fn id_count(self) -> usize {
        match self {
            ClassScheme::Two => 2,
            ClassScheme::Five => 5,
            ClassScheme::Nine => 9,
            ClassScheme::Eleven => NUM_CLASSES + 3,
        }
    }

    pub fn has_background(self) -> bool {
        self != ClassScheme::Two
    }

    /// Human-readable name of every id, in id order.
    pub fn id_names(self) -> Vec<&'static str> {
        match self {
            ClassScheme::Two => ["normal", "abnormal"].to_vec(),
            ClassScheme::Five => FIVE_NAMES.to_vec(),
            ClassScheme::Nine => NINE_NAMES.to_vec(),
            ClassScheme::Eleven => {
                let mut v = alloc::vec!["background"];
                v.extend_from_slice(&crate::CLASS_NAMES);
                v.extend_from_slice(&["overlapping", "unknown"]);
                v
            }
        }
    }
}

/// Id of a region label under `scheme`. Background is always 0 for the
/// mask schemes. Under `Two` only cell classes are meaningful; overlapping
/// and unknown regions map to abnormal there.
pub fn scheme_map(label: RegionLabel, scheme: ClassScheme) -> Result<u8> {
    if let RegionLabel::Class(c) = label {
        if c >= NUM_CLASSES {
            return Err(Error::LabelOutOfRange {
                label: c,
                classes: NUM_CLASSES,
            });
        }
    }
    Ok(match (scheme, label) {
        (ClassScheme::Two, RegionLabel::Class(0)) => 0,
        (ClassScheme::Two, _) => 1,
        (ClassScheme::Five, RegionLabel::Class(0)) => 1,
        (ClassScheme::Five, RegionLabel::Class(_)) => 2,
        (ClassScheme::Five, RegionLabel::Overlapping) => 3,
        (ClassScheme::Five, RegionLabel::Unknown) => 4,
        (ClassScheme::Nine, RegionLabel::Class(c)) => match c {
            0 => 1,
            3 => 2,
            6 => 3,
            4 => 4,
            5 => 5,
            _ => 6,
        },
        (ClassScheme::Nine, RegionLabel::Overlapping) => 7,
        (ClassScheme::Nine, RegionLabel::Unknown) => 8,
        (ClassScheme::Eleven, RegionLabel::Class(c)) => c as u8 + 1,
        (ClassScheme::Eleven, RegionLabel::Overlapping) => NUM_CLASSES as u8 + 1,
        (ClassScheme::Eleven, RegionLabel::Unknown) => NUM_CLASSES as u8 + 2,
    })
}

/// Inverse of [`scheme_map`] for the eleven-class mask ids.
pub fn eleven_id_to_label(id: u8) -> Option<RegionLabel> {
    match id as usize {
        0 => None,
        i if i <= NUM_CLASSES => Some(RegionLabel::Class(i - 1)),
        i if i == NUM_CLASSES + 1 => Some(RegionLabel::Overlapping),
        i if i == NUM_CLASSES + 2 => Some(RegionLabel::Unknown),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub labels: BTreeMap<u32, RegionLabel>,
    /// Annotations that fell on background.
    pub orphans: Vec<AnnotationPoint>,
}

/// Labels every region of `region_map`. Regions listed in `overlapped` or
/// holding points of two or more classes become overlapping; regions with
/// points of a single class take it; the rest are unknown.
pub fn assign_region_labels(
    region_map: &RegionMap,
    annotations: &[AnnotationPoint],
    overlapped: &BTreeSet<u32>,
) -> Result<Assignment> {
    let (w, h) = region_map.dims();
    let mut points: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
    for &id in region_map.as_slice() {
        if id != 0 {
            points.entry(id).or_default();
        }
    }
    let mut orphans = Vec::new();
    for a in annotations {
        if a.x >= w || a.y >= h {
            return Err(Error::AnnotationOutOfBounds {
                x: a.x,
                y: a.y,
                width: w,
                height: h,
            });
        }
        if a.class >= NUM_CLASSES {
            return Err(Error::LabelOutOfRange {
                label: a.class,
                classes: NUM_CLASSES,
            });
        }
        match *region_map.get(a.x, a.y) {
            0 => orphans.push(*a),
            id => {
                points.entry(id).or_default().insert(a.class);
            }
        }
    }
    let labels = points
        .into_iter()
        .map(|(id, classes)| {
            let label = if overlapped.contains(&id) || classes.len() > 1 {
                RegionLabel::Overlapping
            } else if let Some(&c) = classes.first() {
                RegionLabel::Class(c)
            } else {
                RegionLabel::Unknown
            };
            (id, label)
        })
        .collect();
    Ok(Assignment { labels, orphans })
}

/// Paints each region with its scheme id; pixels outside every region and
/// regions without a label become background and unknown respectively.
pub fn build_label_mask(
    region_map: &RegionMap,
    labels: &BTreeMap<u32, RegionLabel>,
    scheme: ClassScheme,
) -> Result<Grid<u8>> {
    if !scheme.has_background() {
        return Err(Error::param("scheme", "the two-class scheme has no mask encoding"));
    }
    let mut ids = BTreeMap::new();
    for (&r, &l) in labels {
        ids.insert(r, scheme_map(l, scheme)?);
    }
    let unknown = scheme_map(RegionLabel::Unknown, scheme)?;
    let data = region_map
        .as_slice()
        .iter()
        .map(|&r| match r {
            0 => 0,
            r => ids.get(&r).copied().unwrap_or(unknown),
        })
        .collect();
    Grid::from_vec(region_map.width(), region_map.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_squares() -> RegionMap {
        Grid::from_fn(12, 6, |x, y| match (x, y) {
            (1..=4, 1..=4) => 1,
            (7..=10, 1..=4) => 2,
            _ => 0,
        })
        .unwrap()
    }

    #[test]
    fn assignment_rules() {
        let map = two_squares();
        let none = BTreeSet::new();
        let a = assign_region_labels(&map, &[AnnotationPoint { x: 2, y: 2, class: 3 }], &none).unwrap();
        assert_eq!(a.labels[&1], RegionLabel::Class(3));
        assert_eq!(a.labels[&2], RegionLabel::Unknown);
        let pts = [
            AnnotationPoint { x: 2, y: 2, class: 3 },
            AnnotationPoint { x: 3, y: 3, class: 4 },
            AnnotationPoint { x: 8, y: 2, class: 5 },
            AnnotationPoint { x: 9, y: 3, class: 5 },
            AnnotationPoint { x: 0, y: 0, class: 1 },
        ];
        let a = assign_region_labels(&map, &pts, &none).unwrap();
        assert_eq!(a.labels[&1], RegionLabel::Overlapping);
        assert_eq!(a.labels[&2], RegionLabel::Class(5));
        assert_eq!(a.orphans, vec![pts[4]]);
        let flagged: BTreeSet<u32> = [2].into_iter().collect();
        let a = assign_region_labels(&map, &pts[2..3], &flagged).unwrap();
        assert_eq!(a.labels[&2], RegionLabel::Overlapping);
    }

    #[test]
    fn bad_annotations_fail() {
        let map = two_squares();
        let none = BTreeSet::new();
        assert!(matches!(
            assign_region_labels(&map, &[AnnotationPoint { x: 12, y: 0, class: 0 }], &none),
            Err(Error::AnnotationOutOfBounds { .. })
        ));
        assert!(assign_region_labels(&map, &[AnnotationPoint { x: 1, y: 1, class: 11 }], &none).is_err());
    }

    #[test]
    fn scheme_tables() {
        use RegionLabel::*;
        assert_eq!(scheme_map(Class(0), ClassScheme::Two).unwrap(), 0);
        assert!((1..11).all(|c| scheme_map(Class(c), ClassScheme::Two).unwrap() == 1));
        assert_eq!(scheme_map(Class(3), ClassScheme::Five).unwrap(), 2);
        assert_eq!(scheme_map(Class(7), ClassScheme::Nine).unwrap(), 6);
        assert_eq!(scheme_map(Class(9), ClassScheme::Nine).unwrap(), 6);
        assert_eq!(scheme_map(Class(5), ClassScheme::Nine).unwrap(), 5);
        assert!(scheme_map(Class(11), ClassScheme::Five).is_err());
        // the nine-class scheme keeps four abnormal types and groups six
        let grouped = (1..11)
            .filter(|&c| scheme_map(Class(c), ClassScheme::Nine).unwrap() == 6)
            .count();
        assert_eq!(grouped, 6);
        for s in ClassScheme::ALL {
            assert_eq!(s.id_names().len(), s.id_count());
            assert_eq!(ClassScheme::parse(s.name()), Some(s));
            let mut all = vec![scheme_map(Overlapping, s).unwrap(), scheme_map(Unknown, s).unwrap()];
            all.extend((0..11).map(|c| scheme_map(Class(c), s).unwrap()));
            assert!(all.iter().all(|&i| (i as usize) < s.id_count()));
        }
        for id in 1..14u8 {
            let l = eleven_id_to_label(id).unwrap();
            assert_eq!(scheme_map(l, ClassScheme::Eleven).unwrap(), id);
        }
    }

    #[test]
    fn masks_conserve_pixels() {
        let map = two_squares();
        let labels: BTreeMap<u32, RegionLabel> = [(1, RegionLabel::Class(3)), (2, RegionLabel::Class(7))]
            .into_iter()
            .collect();
        let five = build_label_mask(&map, &labels, ClassScheme::Five).unwrap();
        assert_eq!(*five.get(2, 2), 2);
        let nine = build_label_mask(&map, &labels, ClassScheme::Nine).unwrap();
        assert_eq!(*nine.get(8, 2), 6);
        let bg = five.as_slice().iter().filter(|&&v| v == 0).count();
        assert_eq!(bg, 72 - 32);
        assert!(build_label_mask(&map, &labels, ClassScheme::Two).is_err());
        let partial: BTreeMap<u32, RegionLabel> = [(1, RegionLabel::Class(0))].into_iter().collect();
        assert_eq!(
            *build_label_mask(&map, &partial, ClassScheme::Five).unwrap().get(8, 2),
            4
        );
    }

    #[test]
    fn rebuilding_from_regions_is_idempotent() {
        let map = two_squares();
        let labels: BTreeMap<u32, RegionLabel> = [(1, RegionLabel::Class(2)), (2, RegionLabel::Overlapping)]
            .into_iter()
            .collect();
        let mask = build_label_mask(&map, &labels, ClassScheme::Eleven).unwrap();
        let regions = crate::evaluation::regions_from_label_mask(&mask).unwrap();
        let mut rebuilt_map = Grid::filled(12, 6, 0u32).unwrap();
        let mut rebuilt_labels = BTreeMap::new();
        for r in &regions {
            let (x, y) = r.pixels[0];
            rebuilt_labels.insert(r.id, eleven_id_to_label(*mask.get(x, y)).unwrap());
            for &(x, y) in &r.pixels {
                rebuilt_map.set(x, y, r.id);
            }
        }
        assert_eq!(
            build_label_mask(&rebuilt_map, &rebuilt_labels, ClassScheme::Eleven).unwrap(),
            mask
        );
    }
}
