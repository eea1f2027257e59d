//! Literal certificate data. `CHECKSUM` is the SHA-256 of [`super::Transcript::canonical_text`].

/// `(word, 1-based roots)`.
pub(super) type Term = (&'static str, &'static [usize]);
/// One bracketed difference `first - second`.
pub(super) type Pair = (Term, Term);

pub(super) const CHECKSUM: &str = "1bbd2bf1bee002c650ab46ec05c19081706e2c45c479b2ef5af6fa6e03402412";

pub(super) const DENOMINATOR: i64 = 112;

pub(super) const M_NUMERATORS: [[i64; 5]; 5] = [
    [86, 6, 40, 40, -40],
    [6, 136, 46, 46, -46],
    [40, 46, 101, -17, -38],
    [40, 46, -17, 101, -46],
    [-40, -46, -38, -46, 101],
];

const X1: &[Pair] = &[
    (("1234", &[1, 2]), ("1243", &[1, 2])),
    (("1234", &[1, 4]), ("1324", &[1, 4])),
    (("1234", &[2, 3]), ("4231", &[2, 3])),
    (("1234", &[3, 4]), ("2134", &[3, 4])),
    (("1342", &[1, 4]), ("1432", &[1, 4])),
    (("1423", &[1, 2]), ("1432", &[1, 2])),
    (("2314", &[3, 4]), ("3214", &[3, 4])),
    (("2341", &[1, 2]), ("2314", &[1, 2])),
    (("2341", &[2, 3]), ("1342", &[2, 3])),
    (("2413", &[1, 4]), ("2143", &[1, 4])),
    (("3124", &[1, 4]), ("3214", &[1, 4])),
    (("3142", &[2, 3]), ("2143", &[2, 3])),
    (("3412", &[1, 2]), ("3421", &[1, 2])),
    (("3412", &[3, 4]), ("4312", &[3, 4])),
    (("4123", &[2, 3]), ("3124", &[2, 3])),
    (("4123", &[3, 4]), ("1423", &[3, 4])),
];

const X2: &[Pair] = &[
    (("1234", &[1, 3]), ("1432", &[1, 3])),
    (("1234", &[2, 4]), ("3214", &[2, 4])),
    (("2341", &[1, 3]), ("2143", &[1, 3])),
    (("4123", &[2, 4]), ("2143", &[2, 4])),
];

const X3: &[Pair] = &[
    (("1243", &[1, 4]), ("1423", &[1, 4])),
    (("1243", &[2, 3]), ("3241", &[2, 3])),
    (("1324", &[1, 2]), ("1342", &[1, 2])),
    (("1324", &[2, 4]), ("2314", &[2, 4])),
    (("1342", &[2, 3]), ("2341", &[2, 3])),
    (("1423", &[3, 4]), ("4123", &[3, 4])),
    (("2134", &[1, 3]), ("2431", &[1, 3])),
    (("2134", &[2, 4]), ("3124", &[2, 4])),
    (("2143", &[1, 3]), ("2341", &[1, 3])),
    (("2143", &[1, 4]), ("2413", &[1, 4])),
    (("2143", &[2, 3]), ("3142", &[2, 3])),
    (("2143", &[2, 4]), ("4123", &[2, 4])),
    (("2314", &[1, 2]), ("2341", &[1, 2])),
    (("2413", &[3, 4]), ("4213", &[3, 4])),
    (("3124", &[2, 3]), ("4123", &[2, 3])),
    (("3142", &[2, 4]), ("4132", &[2, 4])),
];

const X4: &[Pair] = &[
    (("1324", &[2, 4]), ("2314", &[2, 4])),
    (("1324", &[3, 4]), ("3124", &[3, 4])),
    (("1342", &[2, 3]), ("2341", &[2, 3])),
    (("1423", &[3, 4]), ("4123", &[3, 4])),
    (("2134", &[1, 3]), ("2431", &[1, 3])),
    (("2134", &[1, 4]), ("2314", &[1, 4])),
    (("2134", &[2, 3]), ("4132", &[2, 3])),
    (("2134", &[2, 4]), ("3124", &[2, 4])),
    (("2143", &[1, 3]), ("2341", &[1, 3])),
    (("2143", &[1, 4]), ("2413", &[1, 4])),
    (("2143", &[2, 3]), ("3142", &[2, 3])),
    (("2143", &[2, 4]), ("4123", &[2, 4])),
    (("2314", &[1, 2]), ("2341", &[1, 2])),
    (("2413", &[1, 2]), ("2431", &[1, 2])),
    (("3124", &[2, 3]), ("4123", &[2, 3])),
    (("3142", &[2, 4]), ("4132", &[2, 4])),
];

const X5: &[Pair] = &[
    (("1324", &[2, 4]), ("2314", &[2, 4])),
    (("1342", &[1, 3]), ("1243", &[1, 3])),
    (("1423", &[1, 3]), ("1324", &[1, 3])),
    (("2134", &[1, 3]), ("2431", &[1, 3])),
    (("2134", &[2, 4]), ("3124", &[2, 4])),
    (("3142", &[2, 4]), ("4132", &[2, 4])),
    (("3241", &[1, 3]), ("3142", &[1, 3])),
    (("4213", &[2, 4]), ("1243", &[2, 4])),
];

const Y1: &[Pair] = &[
    (("4321", &[3, 4]), ("3421", &[3, 4])),
    (("4321", &[1, 4]), ("4231", &[1, 4])),
    (("4321", &[2, 3]), ("1324", &[2, 3])),
    (("4321", &[1, 2]), ("4312", &[1, 2])),
    (("3241", &[3, 4]), ("2341", &[3, 4])),
    (("2431", &[1, 4]), ("2341", &[1, 4])),
    (("4213", &[1, 4]), ("4123", &[1, 4])),
    (("3214", &[2, 3]), ("4213", &[2, 3])),
    (("3214", &[1, 2]), ("3241", &[1, 2])),
    (("2413", &[2, 3]), ("3412", &[2, 3])),
    (("4132", &[1, 2]), ("4123", &[1, 2])),
    (("3142", &[1, 4]), ("3412", &[1, 4])),
    (("2143", &[1, 2]), ("2134", &[1, 2])),
    (("2143", &[3, 4]), ("1243", &[3, 4])),
    (("1432", &[3, 4]), ("4132", &[3, 4])),
    (("1432", &[2, 3]), ("2431", &[2, 3])),
];

const Y2: &[Pair] = &[
    (("4321", &[2, 4]), ("2341", &[2, 4])),
    (("4321", &[1, 3]), ("4123", &[1, 3])),
    (("3214", &[1, 3]), ("3412", &[1, 3])),
    (("1432", &[2, 4]), ("3412", &[2, 4])),
];

const Y3: &[Pair] = &[
    (("3421", &[2, 4]), ("2431", &[2, 4])),
    (("3421", &[1, 3]), ("3124", &[1, 3])),
    (("4231", &[2, 4]), ("3241", &[2, 4])),
    (("4231", &[1, 2]), ("4213", &[1, 2])),
    (("3241", &[1, 2]), ("3214", &[1, 2])),
    (("2431", &[2, 3]), ("1432", &[2, 3])),
    (("4312", &[2, 3]), ("2314", &[2, 3])),
    (("4312", &[1, 4]), ("4132", &[1, 4])),
    (("3412", &[1, 3]), ("3214", &[1, 3])),
    (("3412", &[2, 3]), ("2413", &[2, 3])),
    (("3412", &[1, 4]), ("3142", &[1, 4])),
    (("3412", &[2, 4]), ("1432", &[2, 4])),
    (("4213", &[2, 3]), ("3214", &[2, 3])),
    (("2413", &[2, 4]), ("1423", &[2, 4])),
    (("4132", &[3, 4]), ("1432", &[3, 4])),
    (("3142", &[3, 4]), ("1342", &[3, 4])),
];

const Y4: &[Pair] = &[
    (("4231", &[1, 2]), ("4213", &[1, 2])),
    (("4231", &[1, 3]), ("4132", &[1, 3])),
    (("3241", &[1, 2]), ("3214", &[1, 2])),
    (("2431", &[2, 3]), ("1432", &[2, 3])),
    (("4312", &[2, 3]), ("2314", &[2, 3])),
    (("4312", &[1, 3]), ("4213", &[1, 3])),
    (("4312", &[2, 4]), ("1342", &[2, 4])),
    (("4312", &[1, 4]), ("4132", &[1, 4])),
    (("3412", &[1, 3]), ("3214", &[1, 3])),
    (("3412", &[2, 3]), ("2413", &[2, 3])),
    (("3412", &[1, 4]), ("3142", &[1, 4])),
    (("3412", &[2, 4]), ("1432", &[2, 4])),
    (("4213", &[2, 3]), ("3214", &[2, 3])),
    (("2413", &[1, 3]), ("2314", &[1, 3])),
    (("4132", &[3, 4]), ("1432", &[3, 4])),
    (("3142", &[3, 4]), ("1342", &[3, 4])),
];

const Y5: &[Pair] = &[
    (("4231", &[1, 2]), ("4213", &[1, 2])),
    (("3241", &[1, 4]), ("3421", &[1, 4])),
    (("2431", &[3, 4]), ("4231", &[3, 4])),
    (("4312", &[2, 3]), ("2314", &[2, 3])),
    (("4312", &[1, 4]), ("4132", &[1, 4])),
    (("3142", &[3, 4]), ("1342", &[3, 4])),
    (("3124", &[1, 2]), ("3142", &[1, 2])),
    (("1423", &[2, 3]), ("3421", &[2, 3])),
];

pub(super) const Z1: &[Pair] = &[
    (("1234", &[1, 3]), ("1432", &[1, 3])),
    (("1234", &[2, 4]), ("3214", &[2, 4])),
    (("2341", &[1, 3]), ("2143", &[1, 3])),
    (("4123", &[2, 4]), ("2143", &[2, 4])),
];

pub(super) const Z2: &[Pair] = &[
    (("4321", &[2, 4]), ("2341", &[2, 4])),
    (("4321", &[1, 3]), ("4123", &[1, 3])),
    (("3214", &[1, 3]), ("3412", &[1, 3])),
    (("1432", &[2, 4]), ("3412", &[2, 4])),
];

pub(super) const X: [&[Pair]; 5] = [X1, X2, X3, X4, X5];
pub(super) const Y: [&[Pair]; 5] = [Y1, Y2, Y3, Y4, Y5];
