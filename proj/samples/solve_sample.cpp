// Solves samples/two_agents.json (or the file given as argv[1]) and prints
// each agent's bundle next to the exact optimum.

#include <fstream>
#include <iostream>
#include <sstream>

#include "nswxos/nswxos.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "samples/two_agents.json";
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << "\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();
  const auto file = nswxos::parse_instance(text.str());
  const auto& inst = file.instance;

  const auto result = nswxos::solve(inst, 42);
  for (nswxos::Agent i = 0; i < inst.n(); ++i) {
    std::cout << "agent " << i << ":";
    for (nswxos::Good g : result.allocation[i]) std::cout << ' ' << g;
    std::cout << "  value " << inst.value(i, result.allocation[i]) << "\n";
  }
  std::cout << "nsw " << nswxos::nsw(inst, result.allocation) << "\n";
  std::cout << "opt " << nswxos::brute_force_nsw(inst).value << "\n";
}
