class Account {
  int id;
public:
  double balance, *history;
protected:
  char code[4];
private:
  static int count;
};
