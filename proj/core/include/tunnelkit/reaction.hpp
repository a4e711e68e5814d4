#pragma once

#include <string>
#include <string_view>

#include "tunnelkit/physics.hpp"

namespace tunnelkit {

enum class Site { COOH, NH2, SYNTH };
enum class Isotope { H, D };

std::string_view to_string(Site site) noexcept;
Site site_from_string(std::string_view name);
std::string_view to_string(Isotope isotope) noexcept;
Isotope isotope_from_string(std::string_view name);

// One reaction pathway: a barrier shared by both isotopologues, the two
// transferred-particle masses, and the zero-point shift that raises the
// deuterium classical barrier. SI units throughout.
struct ReactionSystem {
    std::string id;
    std::string label;
    Site site = Site::SYNTH;
    BarrierSpec barrier;
    double mass_H = 0.0;          // kg
    double mass_D = 0.0;          // kg
    double zpe_shift = 0.0;       // J, added to the D forward barrier
    double prefactor_scale = 1.0;

    double mass(Isotope isotope) const noexcept { return isotope == Isotope::H ? mass_H : mass_D; }

    // Classical activation energy of the isotopologue.
    double activation_energy(Isotope isotope) const noexcept {
        return barrier.v_forward + (isotope == Isotope::D ? zpe_shift : 0.0);
    }
};

void validate(const ReactionSystem& system);

}  // namespace tunnelkit
