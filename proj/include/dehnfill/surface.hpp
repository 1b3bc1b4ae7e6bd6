#pragma once

#include "dehnfill/numeric.hpp"

#include <sstream>

namespace dehnfill {

// Compact surface up to homeomorphism: orientability, genus (crosscap count
// when non-orientable, >= 1), and number of boundary circles.
struct Surface {
    bool orientable = true;
    int genus = 0;
    int boundary = 0;

    Surface() = default;
    Surface(bool ori, int g, int b) : orientable(ori), genus(g), boundary(b) {
        if (g < 0 || b < 0 || (!ori && g < 1)) throw std::invalid_argument("Surface: bad data");
    }

    static Surface sphere(int boundary = 0) { return {true, 0, boundary}; }
    static Surface disc() { return {true, 0, 1}; }
    static Surface annulus() { return {true, 0, 2}; }
    static Surface torus(int boundary = 0) { return {true, 1, boundary}; }
    static Surface rp2(int boundary = 0) { return {false, 1, boundary}; }
    static Surface mobius() { return {false, 1, 1}; }
    static Surface klein(int boundary = 0) { return {false, 2, boundary}; }
    static Surface orientable_genus(int g, int b = 0) { return {true, g, b}; }
    static Surface nonorientable_genus(int c, int b = 0) { return {false, c, b}; }

    bool operator==(const Surface& o) const {
        return orientable == o.orientable && genus == o.genus && boundary == o.boundary;
    }
    bool operator!=(const Surface& o) const { return !(*this == o); }
    bool operator<(const Surface& o) const {
        return std::tuple(orientable, genus, boundary) < std::tuple(o.orientable, o.genus, o.boundary);
    }

    Surface capped_off() const {
        if (boundary == 0) throw std::domain_error("capped_off: closed surface");
        return {orientable, genus, boundary - 1};
    }
    Surface punctured() const { return {orientable, genus, boundary + 1}; }

    int crosscap_equivalent() const { return orientable ? 2 * genus : genus; }

    bool is_disc() const { return orientable && genus == 0 && boundary == 1; }
    bool is_annulus() const { return orientable && genus == 0 && boundary == 2; }
    bool is_sphere() const { return orientable && genus == 0 && boundary == 0; }
    bool is_mobius() const { return !orientable && genus == 1 && boundary == 1; }
    bool is_rp2() const { return !orientable && genus == 1 && boundary == 0; }
    bool is_torus() const { return orientable && genus == 1 && boundary == 0; }
    bool is_klein() const { return !orientable && genus == 2 && boundary == 0; }
    bool is_planar() const { return orientable && genus == 0; }

    // glue two surfaces along one boundary circle of each
    static Surface glue_along_circle(const Surface& s1, const Surface& s2) {
        if (s1.boundary == 0 || s2.boundary == 0)
            throw std::domain_error("glue_along_circle: need boundary");
        bool ori = s1.orientable && s2.orientable;
        int g = ori ? s1.genus + s2.genus : s1.crosscap_equivalent() + s2.crosscap_equivalent();
        return {ori, g, s1.boundary + s2.boundary - 2};
    }
    // self-gluing of two distinct boundary circles (orientable handle attach)
    Surface self_glue_orientable() const {
        if (boundary < 2) throw std::domain_error("self_glue: need two boundary circles");
        if (!orientable) return {false, genus + 2, boundary - 2};
        return {true, genus + 1, boundary - 2};
    }

    std::string str() const {
        std::ostringstream os;
        if (orientable) {
            if (genus == 0)
                os << "S2";
            else if (genus == 1)
                os << "T2";
            else
                os << "Sg" << genus;
        } else {
            if (genus == 1)
                os << "RP2";
            else if (genus == 2)
                os << "K2";
            else
                os << "Ng" << genus;
        }
        return os.str();
    }

    static Surface parse(const std::string& token, int boundary) {
        if (token == "S2") return sphere(boundary);
        if (token == "T2") return torus(boundary);
        if (token == "RP2") return rp2(boundary);
        if (token == "K2") return klein(boundary);
        if (token.rfind("Sg", 0) == 0) return orientable_genus(std::stoi(token.substr(2)), boundary);
        if (token.rfind("Ng", 0) == 0) return nonorientable_genus(std::stoi(token.substr(2)), boundary);
        throw std::invalid_argument("Surface: unknown base token " + token);
    }
};

}  // namespace dehnfill
