// Shared material data and strip configurations for the tests.
#pragma once

#include "bistrip/model.hpp"

namespace fixtures {

inline const bistrip::Material iron{82e9, 7860};
inline const bistrip::Material magnesium{17e9, 1738};
inline const bistrip::Material aluminium{26e9, 2700};

inline bistrip::StripConfig strip(bistrip::Material upper, bistrip::Material lower, double l = 2.0, double H1 = 3.0,
                                  double H2 = 3.0) {
    bistrip::StripConfig c;
    c.upper = upper;
    c.lower = lower;
    c.H1 = H1;
    c.H2 = H2;
    c.epsilon = 0.025;
    c.a = 6.0;
    c.l = l;
    return c;
}

inline bistrip::StripConfig iron_symmetric(double l = 2.0) { return strip(iron, iron, l); }
inline bistrip::StripConfig fe_al(double l = 2.0) { return strip(iron, aluminium, l); }
inline bistrip::StripConfig mg_al(double l = 2.0) { return strip(magnesium, aluminium, l); }
inline bistrip::StripConfig fe_al_asymmetric(double l = 2.0) { return strip(iron, aluminium, l, 0.4, 5.6); }

inline bistrip::StripConfig with_kappa_star(bistrip::StripConfig c, double kappa_star) {
    c.kappa = bistrip::kappa_from_kappa_star(kappa_star, c.upper.shear_modulus, c.lower.shear_modulus, c.H1, c.H2);
    return c;
}

} // namespace fixtures
