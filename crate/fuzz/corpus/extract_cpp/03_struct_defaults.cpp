struct P {
  int x;
};

struct Q : P {
private:
  int y;
};

class R : P {
  int z;
};
