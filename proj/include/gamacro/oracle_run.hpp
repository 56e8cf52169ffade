#pragma once
#include <map>
#include <string>

#include "gamacro/compiler.hpp"
#include "gamacro/oracle.hpp"

namespace gamacro::oracle {

// Reference frame for a compiled frame (n <= 8), cached per frame.
NumFramePtr num_frame(const FramePtr& f);

// Executes the IR directly on dense double multivectors. Inputs are restricted to
// their class blades with class constants pinned; outputs are restricted to their class.
// Throws Error("NullVersor") when a divisor falls below 1e-14 in magnitude.
std::map<std::string, NumMultivector> run_macro(const MacroIR& m, const std::map<std::string, NumMultivector>& inputs);

}  // namespace gamacro::oracle
