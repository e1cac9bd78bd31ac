#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

// Conditioning on a mode that carries no amplitude leaves the renormalised
// survivor undefined (0/0), so it is reported as an error rather than as an
// empty distribution.
class ZeroConditioningProbability : public std::runtime_error {
  public:
    explicit ZeroConditioningProbability(const std::string& what)
        : std::runtime_error(what) {}
};

// A post-selection or averaging step matched no events at all.
class EmptySelection : public std::runtime_error {
  public:
    explicit EmptySelection(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace qwalk
