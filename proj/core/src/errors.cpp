#include "thermoprint/errors.hpp"

namespace thermoprint {

ErodedToEmptyError::ErodedToEmptyError(int iterations)
    : Error("mask eroded to empty after " + std::to_string(iterations) +
            " erosion iteration(s)"),
      iterations_(iterations) {}

DivergenceError::DivergenceError(int epoch)
    : Error("training diverged: non-finite loss at epoch " +
            std::to_string(epoch)),
      epoch_(epoch) {}

}  // namespace thermoprint
