#include <csignal>
#include <iostream>

#include "erupt/cli.hpp"

int main(int argc, char** argv)
{
  // Block termination signals before any thread starts; serve waits for
  // them with sigwait.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::vector<std::string> args(argv + 1, argv + argc);
  return erupt::cli::run(args, std::cout, std::cerr);
}
