use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type Point = [f64; 2];

/// Axis-aligned rectangle `[xmin, xmax] x [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Rect { xmin, xmax, ymin, ymax }
    }

    /// The reference domain `[-1, 1]^2`.
    pub fn symmetric_unit() -> Self {
        Rect::new(-1.0, 1.0, -1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p[0] >= self.xmin - tol && p[0] <= self.xmax + tol && p[1] >= self.ymin - tol && p[1] <= self.ymax + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleInclusion {
    pub center: Point,
    pub radius: f64,
}

impl CircleInclusion {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidDomain(format!("inclusion radius must be positive, got {radius}")));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidDomain("inclusion center is not finite".into()));
        }
        Ok(CircleInclusion { center, radius })
    }

    pub fn contains(&self, p: Point) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx * dx + dy * dy < self.radius * self.radius
    }

    fn strictly_inside(&self, r: &Rect) -> bool {
        self.center[0] - self.radius > r.xmin
            && self.center[0] + self.radius < r.xmax
            && self.center[1] - self.radius > r.ymin
            && self.center[1] + self.radius < r.ymax
    }

    fn overlaps(&self, other: &CircleInclusion) -> bool {
        let d = ((self.center[0] - other.center[0]).powi(2) + (self.center[1] - other.center[1]).powi(2)).sqrt();
        d <= self.radius + other.radius
    }
}

/// Subdomain label of a fine cell: free fluid or porous inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Fluid,
    Porous,
}

impl Region {
    /// Indicator `xi`: 1 in the fluid, the porosity inside inclusions.
    pub fn xi(self, porosity: f64) -> f64 {
        match self {
            Region::Fluid => 1.0,
            Region::Porous => porosity,
        }
    }

    /// Indicator `chi`: 0 in the fluid, 1 inside inclusions.
    pub fn chi(self) -> f64 {
        match self {
            Region::Fluid => 0.0,
            Region::Porous => 1.0,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Region::Fluid => 0,
            Region::Porous => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Region::Fluid),
            1 => Some(Region::Porous),
            _ => None,
        }
    }
}

/// Rectangular domain with non-overlapping circular porous inclusions.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    bbox: Rect,
    inclusions: Vec<CircleInclusion>,
    porosity: f64,
}

impl DomainSpec {
    pub fn new(bbox: Rect, inclusions: Vec<CircleInclusion>, porosity: f64) -> Result<Self> {
        if !(bbox.width() > 0.0 && bbox.height() > 0.0) {
            return Err(Error::InvalidDomain(format!("bounding box has zero area: {bbox:?}")));
        }
        if !(porosity > 0.0 && porosity <= 1.0) {
            return Err(Error::InvalidDomain(format!("porosity must lie in (0, 1], got {porosity}")));
        }
        for (i, c) in inclusions.iter().enumerate() {
            if !c.strictly_inside(&bbox) {
                return Err(Error::InvalidDomain(format!("inclusion {i} is not strictly inside the bounding box")));
            }
            for (j, d) in inclusions[..i].iter().enumerate() {
                if c.overlaps(d) {
                    return Err(Error::InvalidDomain(format!("inclusions {j} and {i} overlap")));
                }
            }
        }
        Ok(DomainSpec { bbox, inclusions, porosity })
    }

    /// Seeded rejection sampling of `count` non-overlapping inclusions with
    /// radii in `[r_min, r_max]`, keeping `margin` clearance from the box and
    /// from each other.
    pub fn random(bbox: Rect, count: usize, r_min: f64, r_max: f64, margin: f64, porosity: f64, seed: u64) -> Result<Self> {
        if !(r_min > 0.0 && r_max >= r_min) {
            return Err(Error::InvalidDomain(format!("invalid radius range [{r_min}, {r_max}]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out: Vec<CircleInclusion> = Vec::with_capacity(count);
        let max_attempts = 10_000 * count.max(1);
        let mut attempts = 0;
        while out.len() < count {
            attempts += 1;
            if attempts > max_attempts {
                return Err(Error::InvalidDomain(format!(
                    "could not place {count} inclusions after {max_attempts} attempts (placed {})",
                    out.len()
                )));
            }
            let r = if r_max > r_min { rng.random_range(r_min..r_max) } else { r_min };
            let lo_x = bbox.xmin + r + margin;
            let hi_x = bbox.xmax - r - margin;
            let lo_y = bbox.ymin + r + margin;
            let hi_y = bbox.ymax - r - margin;
            if !(hi_x > lo_x && hi_y > lo_y) {
                continue;
            }
            let c = CircleInclusion { center: [rng.random_range(lo_x..hi_x), rng.random_range(lo_y..hi_y)], radius: r };
            let clear = out.iter().all(|d| {
                let dist = ((c.center[0] - d.center[0]).powi(2) + (c.center[1] - d.center[1]).powi(2)).sqrt();
                dist > c.radius + d.radius + margin
            });
            if clear {
                out.push(c);
            }
        }
        DomainSpec::new(bbox, out, porosity)
    }

    pub fn bbox(&self) -> Rect {
        self.bbox
    }

    pub fn inclusions(&self) -> &[CircleInclusion] {
        &self.inclusions
    }

    pub fn porosity(&self) -> f64 {
        self.porosity
    }

    pub fn region_of(&self, p: Point) -> Region {
        if self.inclusions.iter().any(|c| c.contains(p)) {
            Region::Porous
        } else {
            Region::Fluid
        }
    }
}
