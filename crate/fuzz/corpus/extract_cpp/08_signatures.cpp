class Api {
public:
  void f(const int& x, char* y = 0);
  int g(void) const;
  void h(unsigned long);
  void k(const char * const p);
};
