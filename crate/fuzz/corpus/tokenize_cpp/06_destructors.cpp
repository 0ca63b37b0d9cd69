class Base {
public:
  Base();
  virtual ~Base();
};

class Plain {
public:
  Plain(int v);
  ~Plain();
};

class Derived : public Base {
public:
  Derived() : Base() {}
  ~Derived() override {}
};
