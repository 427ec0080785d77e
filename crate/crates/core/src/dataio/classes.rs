use std::fmt;

use super::DataError;

/// Number of sign classes in the harmonized taxonomy.
pub const NUM_CLASSES: usize = 10;

/// Identifier of one of the ten harmonized sign classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(u8);

impl ClassId {
    pub fn new(id: usize) -> Result<Self, DataError> {
        if id < NUM_CLASSES {
            Ok(Self(id as u8))
        } else {
            Err(DataError::UnknownClass(id))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = ClassId> {
        (0..NUM_CLASSES as u8).map(ClassId)
    }

    pub fn info(self) -> &'static SignClass {
        &SIGN_CLASSES[self.index()]
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.info().name)
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct SignClass {
    pub id: usize,
    pub name: &'static str,
    pub feature_tags: &'static [&'static str],
}

pub static SIGN_CLASSES: [SignClass; NUM_CLASSES] = [
    SignClass {
        id: 0,
        name: "Closed to all in both directions",
        feature_tags: &["circle", "white", "red"],
    },
    SignClass {
        id: 1,
        name: "No entry",
        feature_tags: &["circle", "white stripe", "red"],
    },
    SignClass {
        id: 2,
        name: "Stop and give way",
        feature_tags: &["white text", "red"],
    },
    SignClass {
        id: 3,
        name: "Speed limit 30",
        feature_tags: &["circle", "white", "red", "black text"],
    },
    SignClass {
        id: 4,
        name: "Speed limit 50",
        feature_tags: &["circle", "white", "red", "black text"],
    },
    SignClass {
        id: 5,
        name: "Speed limit 70",
        feature_tags: &["circle", "white", "red", "black text"],
    },
    SignClass {
        id: 6,
        name: "Speed limit 100",
        feature_tags: &["circle", "white", "red", "black text"],
    },
    SignClass {
        id: 7,
        name: "End of restriction",
        feature_tags: &["circle", "white", "black"],
    },
    SignClass {
        id: 8,
        name: "Priority road",
        feature_tags: &["diamond", "white", "yellow"],
    },
    SignClass {
        id: 9,
        name: "Give way",
        feature_tags: &["triangle", "white", "red"],
    },
];

impl SignClass {
    /// Whether the sign carries text or digits.
    pub fn has_text(&self) -> bool {
        self.feature_tags.iter().any(|t| t.contains("text"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_ten_ordered_classes() {
        for (i, c) in SIGN_CLASSES.iter().enumerate() {
            assert_eq!(c.id, i);
        }
        assert_eq!(SIGN_CLASSES[1].name, "No entry");
        assert_eq!(SIGN_CLASSES[1].feature_tags.join(", "), "circle, white stripe, red");
        assert_eq!(SIGN_CLASSES[9].name, "Give way");
        assert!(ClassId::new(10).is_err());
    }

    #[test]
    fn text_bearing_classes() {
        let text: Vec<usize> = SIGN_CLASSES.iter().filter(|c| c.has_text()).map(|c| c.id).collect();
        assert_eq!(text, vec![2, 3, 4, 5, 6]);
    }
}
