#include <iostream>

#include "hpm/acceptance.hpp"

int main() { return hpm::acceptance::run_all(std::cout) ? 0 : 1; }
