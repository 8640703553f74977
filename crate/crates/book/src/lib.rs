//! Compiles the guide's code listings as doctests, so the book cannot drift
//! from the library.

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        pub mod $name {}
    };
}

chapter!(introduction, "introduction.md");
chapter!(identifiers, "identifiers.md");
chapter!(ingest, "ingest.md");
chapter!(density, "density.md");
chapter!(numerology, "numerology.md");
chapter!(coverage, "coverage.md");
chapter!(capacity, "capacity.md");
chapter!(balance, "balance.md");
chapter!(economics, "economics.md");
chapter!(cli, "cli.md");
