#include <cstdio>
int main() { std::puts("confdr cli placeholder"); return 0; }
