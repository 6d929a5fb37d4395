#pragma once

#include "mbs/mdp.hpp"

#include <iosfwd>
#include <string>

namespace mbs {

/**
 * Plain-text MDP format, version 1. Blank lines and lines starting with '#'
 * are ignored; every other line is a keyword followed by fields:
 *
 *   mbsrl-mdp 1
 *   name <token>                      (optional)
 *   states <S>
 *   actions <A>
 *   gamma <real>
 *   r_max <real>
 *   initial <p_0> ... <p_{S-1}>
 *   terminal <k> <s_1> ... <s_k>
 *   transition <s> <a> <k> <s'_1> <p_1> ... <s'_k> <p_k>     one per (s,a), row-major
 *   reward <s> <a> <k> <v_1> <q_1> ... <v_k> <q_k>           one per (s,a), row-major
 *   end
 *
 * Transition rows list only non-zero entries. Reals are written with 17
 * significant digits so a write/read cycle is exact.
 */
void write_mdp(std::ostream& out, const TabularMdp& mdp);
TabularMdp read_mdp(std::istream& in);

void save_mdp(const std::string& path, const TabularMdp& mdp);
TabularMdp load_mdp(const std::string& path);

}  // namespace mbs
