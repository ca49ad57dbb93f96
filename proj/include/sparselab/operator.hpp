#pragma once

#include <span>
#include <string>

#include "sparselab/grid.hpp"

namespace sparselab {

/// An m-(sub)linear operator acting on grid functions of a common shape.
class Operator {
 public:
  virtual ~Operator() = default;
  virtual int arity() const = 0;
  virtual std::string name() const = 0;
  virtual GridFunction apply(std::span<const GridFunction> f) const = 0;
};

}  // namespace sparselab
