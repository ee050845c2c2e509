#include <pybind11/pybind11.h>

PYBIND11_MODULE(_ordmeas, m) { m.doc() = "placeholder"; }
