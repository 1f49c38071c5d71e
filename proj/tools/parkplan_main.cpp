// Command-line front end. Subcommands land together with the planner wiring.
#include <cstdio>

int main() {
  std::fprintf(stderr, "parkplan: command line not wired up yet\n");
  return 1;
}
