#pragma once

#include <string>

#include "neurolgp/genome.hpp"

namespace nlgp::test {

/// Conv -> MaxPool -> BatchNorm -> Dense with an intron on line 2.
inline const std::string kExampleListing =
    "r[0] := Conv(r[1])\n"
    "r[4] := BatchNorm(r[3])\n"
    "r[5] := MaxPool(r[0])\n"
    "r[11] := BatchNorm(r[5])\n"
    "r[0] := Dense(r[11])\n";

inline int op(const char* name) { return *Catalogue::standard().find(std::string_view(name)); }

inline Instruction ins(int dest, const char* name, int src) { return {dest, op(name), src}; }

}  // namespace nlgp::test
